use std::path::{Path, PathBuf};

use super::artifacts::{read_log, LogTable, RunHeader};
use super::svg::{Chart, Series};
use super::CliError;

/// Figure families that can be rendered from a run log.
#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
#[clap(rename_all = "snake_case")]
pub enum PlotKind {
    Trajectory,
    Weights,
    Sliders,
    TrackingError,
    EstimationError,
}

impl PlotKind {
    pub const ALL: [PlotKind; 5] = [
        PlotKind::Trajectory,
        PlotKind::Weights,
        PlotKind::Sliders,
        PlotKind::TrackingError,
        PlotKind::EstimationError,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PlotKind::Trajectory => "trajectory",
            PlotKind::Weights => "weights",
            PlotKind::Sliders => "sliders",
            PlotKind::TrackingError => "tracking_error",
            PlotKind::EstimationError => "estimation_error",
        }
    }
}

fn pairs(a: &[f64], b: &[f64]) -> Vec<(f64, f64)> {
    a.iter().copied().zip(b.iter().copied()).collect()
}

fn header_for(log: &Path) -> Option<RunHeader> {
    let path = log.parent().unwrap_or(Path::new(".")).join("header.json");
    let text = std::fs::read_to_string(path).ok()?;
    serde_json::from_str(&text).ok()
}

fn time_chart(title: &str, y_label: &str) -> Chart {
    Chart {
        title: title.into(),
        x_label: "t (s)".into(),
        y_label: y_label.into(),
        ..Chart::default()
    }
}

/// Builds the chart of one kind. The trajectory plot uses the run header
/// next to the log, when present, for the frame and the reference path.
pub fn chart(kind: PlotKind, table: &LogTable, header: Option<&RunHeader>) -> Result<Chart, CliError> {
    let chart = match kind {
        PlotKind::Trajectory => {
            let (x, y) = (table.column("x")?, table.column("y")?);
            let mut c = Chart {
                title: "End-effector path".into(),
                x_label: "x (m)".into(),
                y_label: "y (m)".into(),
                equal_aspect: true,
                ..Chart::default()
            };
            if let Some(h) = header {
                let (w, hgt) = (h.scenario.robot.frame_width, h.scenario.robot.frame_height);
                c.series.push(Series::new(
                    "frame",
                    vec![(0.0, 0.0), (w, 0.0), (w, hgt), (0.0, hgt), (0.0, 0.0)],
                ));
                let outline = h.scenario.trajectory.outline(2000);
                c.series
                    .push(Series::new("reference", outline.iter().map(|p| (p.x, p.y)).collect()).dashed());
                c.x_range = Some((-0.05 * w, 1.05 * w));
                c.y_range = Some((-0.05 * hgt, 1.05 * hgt));
            }
            c.series.push(Series::new("true", pairs(&x, &y)));
            c
        }
        PlotKind::Weights => {
            let t = table.column("t")?;
            let mut c = time_chart("Mode weights", "weight");
            for m in 1..=7 {
                c.series.push(Series::new(
                    format!("mode {m}"),
                    pairs(&t, &table.column(&format!("w{m}"))?),
                ));
            }
            c.y_range = Some((-0.05, 1.05));
            c
        }
        PlotKind::Sliders => {
            let t = table.column("t")?;
            let mut c = time_chart("Slider positions", "slider (m)");
            for (i, name) in ["A", "B", "C", "D"].iter().enumerate() {
                c.series.push(Series::new(
                    format!("slider {name}"),
                    pairs(&t, &table.column(&format!("ls{}", i + 1))?),
                ));
            }
            c
        }
        PlotKind::TrackingError => {
            let t = table.column("t")?;
            let e = table.column("err_norm")?;
            let mut c = time_chart("Tracking error", "error (m)");
            c.series.push(Series::new("error norm", pairs(&t, &e)));
            if let (Some(a), Some(b)) = (t.first(), t.last()) {
                c.series
                    .push(Series::new("0.01 m", vec![(*a, 0.01), (*b, 0.01)]).dashed());
            }
            c
        }
        PlotKind::EstimationError => {
            let t = table.column("t")?;
            let mut c = time_chart("Estimation error", "estimate - true");
            for (name, unit) in [("x", "m"), ("y", "m"), ("phi", "rad")] {
                let est = table.column(&format!("est_{name}"))?;
                let truth = table.column(name)?;
                let err: Vec<f64> = est.iter().zip(&truth).map(|(a, b)| a - b).collect();
                c.series.push(Series::new(format!("{name} ({unit})"), pairs(&t, &err)));
            }
            c
        }
    };
    Ok(chart)
}

/// Writes `<kind>.svg` into `out` for every requested kind.
pub fn plot_command(log: &Path, kinds: &[PlotKind], out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let table = read_log(log)?;
    let header = header_for(log);
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let mut written = Vec::new();
    for &kind in kinds {
        let svg = chart(kind, &table, header.as_ref())?.render();
        let path = out.join(format!("{}.svg", kind.name()));
        std::fs::write(&path, svg).map_err(|e| CliError::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}
