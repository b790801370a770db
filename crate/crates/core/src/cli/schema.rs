use crate::sim::Scenario;

const NOTES: &[(&str, &str)] = &[
    ("robot.frame_width", "frame width (m)"),
    ("robot.frame_height", "frame height (m)"),
    (
        "robot.rails",
        "per cable A..D: origin, unit direction and slider interval along it (m)",
    ),
    (
        "robot.attachments",
        "per cable A..D: attachment point in the platform frame (m)",
    ),
    ("robot.mass", "platform mass (kg)"),
    ("robot.inertia", "platform rotational inertia (kg m^2)"),
    ("robot.damping", "viscous damping on (x, y, phi)"),
    (
        "robot.specific_stiffness",
        "cable stiffness times length k0 (N); stiffness is k0 / length",
    ),
    ("robot.tau_min", "minimum commanded tension (N)"),
    ("robot.v_slider_max", "slider speed limit (m/s)"),
    (
        "trajectory",
        "reference path: kind line | circle | zigzag, with speed (m/s) and phi (rad)",
    ),
    ("failures", "list of {cable: A|B|C|D, t_f (s), ramp (s)} in time order"),
    (
        "noise.process",
        "process noise variances on (x, y, phi, vx, vy, vphi), per second",
    ),
    ("noise.measurement", "measurement noise variances on (x, y, phi)"),
    ("imm.transition", "optional 7x7 row-stochastic mode transition matrix"),
    ("imm.weight_floor", "lower bound on every mode weight"),
    ("imm.initial_covariance", "diagonal of the initial filter covariance"),
    ("imm.variance_floor", "lower bound on the filters' noise variances"),
    ("gains.g_p", "proportional gains on (x, y, phi)"),
    ("gains.g_d", "derivative gains on (x, y, phi)"),
    ("run.seed", "noise seed"),
    ("run.duration", "simulated time (s)"),
    ("run.plant_hz", "plant and estimator rate (Hz)"),
    ("run.control_hz", "controller rate (Hz); must divide plant_hz"),
    ("run.integrator", "explicit | drift_implicit"),
    (
        "run.recovery",
        "epsilon (m) release threshold, t_stall (s), confidence for the rewind anchor",
    ),
    (
        "run.lost_spools",
        "hold | pretension: spool command for cables a mode assumes lost",
    ),
];

/// Human-readable reference of every scenario key with its default.
pub fn schema_reference() -> String {
    let defaults = serde_json::to_value(Scenario::default()).expect("scenario serializes");
    let mut out = String::from("Scenario file reference (JSON). Every key is optional; unknown keys are rejected.\n\n");
    for (key, note) in NOTES {
        let mut v = &defaults;
        for part in key.split('.') {
            v = &v[part];
        }
        let shown = if v.is_null() {
            "(built in)".to_string()
        } else {
            v.to_string()
        };
        out.push_str(&format!("{key}\n    {note}\n    default: {shown}\n"));
    }
    out
}
