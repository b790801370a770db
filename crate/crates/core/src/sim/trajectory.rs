use nalgebra::{Vector2, Vector3};
use serde::{Deserialize, Serialize};

/// Built-in reference paths, all traversed at constant `speed` (m/s) with a
/// fixed orientation `phi`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TrajectorySpec {
    Line {
        start: [f64; 2],
        end: [f64; 2],
        #[serde(default = "default_speed")]
        speed: f64,
        #[serde(default)]
        phi: f64,
    },
    Circle {
        center: [f64; 2],
        radius: f64,
        #[serde(default = "default_speed")]
        speed: f64,
        #[serde(default)]
        phi: f64,
    },
    /// Raster of parallel strokes along +y/-y, stepping by `pitch` in x
    /// between strokes.
    Zigzag {
        start: [f64; 2],
        stroke: f64,
        pitch: f64,
        strokes: usize,
        #[serde(default = "default_speed")]
        speed: f64,
        #[serde(default)]
        phi: f64,
    },
}

fn default_speed() -> f64 {
    0.05
}

impl Default for TrajectorySpec {
    fn default() -> Self {
        TrajectorySpec::Zigzag {
            start: [1.6, 0.3],
            stroke: 0.9,
            pitch: -0.1,
            strokes: 13,
            speed: default_speed(),
            phi: 0.0,
        }
    }
}

impl TrajectorySpec {
    pub fn speed(&self) -> f64 {
        match self {
            TrajectorySpec::Line { speed, .. }
            | TrajectorySpec::Circle { speed, .. }
            | TrajectorySpec::Zigzag { speed, .. } => *speed,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.speed() > 0.0 && self.speed().is_finite()) {
            return Err("speed must be positive".into());
        }
        match self {
            TrajectorySpec::Line { start, end, .. } if start == end => Err("line needs distinct end points".into()),
            TrajectorySpec::Circle { radius, .. } if !(*radius > 0.0) => Err("radius must be positive".into()),
            TrajectorySpec::Zigzag { stroke, strokes, .. } if !(*stroke > 0.0) || *strokes == 0 => {
                Err("zigzag needs a positive stroke and at least one stroke".into())
            }
            _ => Ok(()),
        }
    }

    pub fn build(&self) -> Trajectory {
        match *self {
            TrajectorySpec::Line { start, end, phi, .. } => Trajectory::polyline(vec![start.into(), end.into()], phi),
            TrajectorySpec::Circle {
                center, radius, phi, ..
            } => Trajectory {
                path: Path::Circle {
                    center: center.into(),
                    radius,
                },
                phi,
            },
            TrajectorySpec::Zigzag {
                start,
                stroke,
                pitch,
                strokes,
                phi,
                ..
            } => {
                let mut pts = vec![Vector2::from(start)];
                let mut p = Vector2::from(start);
                for i in 0..strokes {
                    let dir = if i % 2 == 0 { 1.0 } else { -1.0 };
                    p.y += dir * stroke;
                    pts.push(p);
                    if i + 1 < strokes {
                        p.x += pitch;
                        pts.push(p);
                    }
                }
                Trajectory::polyline(pts, phi)
            }
        }
    }

    /// Every point the reference can visit, for bounds checks and plotting.
    pub fn outline(&self, samples: usize) -> Vec<Vector2<f64>> {
        let traj = self.build();
        let len = traj.length();
        (0..=samples)
            .map(|i| {
                let p = traj.at(len * i as f64 / samples.max(1) as f64);
                Vector2::new(p.x, p.y)
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
enum Path {
    Polyline {
        points: Vec<Vector2<f64>>,
        cumulative: Vec<f64>,
    },
    Circle {
        center: Vector2<f64>,
        radius: f64,
    },
}

/// Arclength-parameterised reference path.
#[derive(Clone, Debug)]
pub struct Trajectory {
    path: Path,
    phi: f64,
}

impl Trajectory {
    fn polyline(points: Vec<Vector2<f64>>, phi: f64) -> Self {
        let mut cumulative = vec![0.0];
        for w in points.windows(2) {
            let last = *cumulative.last().unwrap();
            cumulative.push(last + (w[1] - w[0]).norm());
        }
        Self {
            path: Path::Polyline { points, cumulative },
            phi,
        }
    }

    /// Total length; a circle reports one lap.
    pub fn length(&self) -> f64 {
        match &self.path {
            Path::Polyline { cumulative, .. } => *cumulative.last().unwrap(),
            Path::Circle { radius, .. } => 2.0 * std::f64::consts::PI * radius,
        }
    }

    /// Pose at arclength `s`. Open paths stop at their end; circles loop,
    /// starting from the rightmost point and running counter-clockwise.
    pub fn at(&self, s: f64) -> Vector3<f64> {
        let p = match &self.path {
            Path::Polyline { points, cumulative } => {
                let s = s.clamp(0.0, *cumulative.last().unwrap());
                let seg = cumulative.partition_point(|&c| c <= s).clamp(1, points.len() - 1) - 1;
                let seg_len = cumulative[seg + 1] - cumulative[seg];
                if seg_len <= 0.0 {
                    points[seg]
                } else {
                    let a = (s - cumulative[seg]) / seg_len;
                    points[seg] + (points[seg + 1] - points[seg]) * a
                }
            }
            Path::Circle { center, radius } => {
                let a = s.max(0.0) / radius;
                center + Vector2::new(a.cos(), a.sin()) * *radius
            }
        };
        Vector3::new(p.x, p.y, self.phi)
    }
}
