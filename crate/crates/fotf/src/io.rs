//! Transfer-function JSON, report JSON and CSV encodings.
//!
//! Floats are written in their shortest round-trip form; integral values
//! print without a fractional part and non-finite values become the strings
//! `"+inf"`, `"-inf"` and `"nan"`.

use std::fmt::Write as _;
use std::path::Path;

use fotf_core::analysis::{FrequencyResponse, InternalStabilityReport, MarginReport, StabilityReport};
use fotf_core::approx::{ErrorMeasure, FitConfig, FitReport, RationalTf};
use fotf_core::timedomain::{StepMetrics, StepResponse};
use fotf_core::{CommensurateTf, Complex64, FractionalPoly};
use serde::Deserialize;
use serde_json::{json, Number, Value};

use crate::CliError;

const MAX_EXACT_INT: f64 = 9_007_199_254_740_992.0;

/// JSON value of a float.
pub fn num(x: f64) -> Value {
    if x.is_nan() {
        return Value::from("nan");
    }
    if x.is_infinite() {
        return Value::from(if x > 0.0 { "+inf" } else { "-inf" });
    }
    if x == x.trunc() && x.abs() <= MAX_EXACT_INT {
        return Value::from(x as i64);
    }
    Value::Number(Number::from_f64(x).expect("finite"))
}

/// Text form of a float, as used in CSV cells.
pub fn fmt_f64(x: f64) -> String {
    match num(x) {
        Value::String(s) => s,
        v => v.to_string(),
    }
}

fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|x| num(*x)).collect())
}

fn opt(x: Option<f64>) -> Value {
    x.map(num).unwrap_or(Value::Null)
}

fn complex(z: Complex64) -> Value {
    json!({ "re": num(z.re), "im": num(z.im) })
}

/// Compact single-line JSON with a trailing newline.
pub fn to_line(v: &Value) -> String {
    let mut s = serde_json::to_string(v).expect("serializable");
    s.push('\n');
    s
}

pub fn to_pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TfDoc {
    base_v: u32,
    num: Vec<f64>,
    den: Vec<f64>,
}

pub fn tf_to_json(tf: &CommensurateTf) -> Value {
    json!({
        "base_v": tf.base_v(),
        "num": nums(tf.num().coeffs()),
        "den": nums(tf.den().coeffs()),
    })
}

pub fn rational_to_json(tf: &RationalTf) -> Value {
    json!({ "base_v": 1, "num": nums(tf.num()), "den": nums(tf.den()) })
}

pub fn tf_from_value(v: Value) -> Result<CommensurateTf, CliError> {
    let doc: TfDoc = serde_json::from_value(v).map_err(|e| CliError::Parse(format!("transfer function: {e}")))?;
    CommensurateTf::from_w_coeffs(doc.base_v, doc.num, doc.den)
        .map_err(|e| CliError::Parse(format!("transfer function: {e}")))
}

pub fn tf_from_str(text: &str) -> Result<CommensurateTf, CliError> {
    let v: Value = serde_json::from_str(text).map_err(|e| CliError::Parse(format!("transfer function: {e}")))?;
    tf_from_value(v)
}

/// Reads a transfer function given inline (text starting with `{`) or as a file path.
pub fn read_tf_arg(arg: &str) -> Result<CommensurateTf, CliError> {
    if arg.trim_start().starts_with('{') {
        tf_from_str(arg)
    } else {
        tf_from_str(&read_file(Path::new(arg))?)
    }
}

pub fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path.display().to_string(), e))
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::io(path.display().to_string(), e))
}

pub fn bode_csv(resp: &FrequencyResponse) -> String {
    let mut s = String::from("omega_rad_s,mag_db,phase_deg\n");
    for k in 0..resp.len() {
        let _ = writeln!(s, "{},{},{}", fmt_f64(resp.omega[k]), fmt_f64(resp.mag_db[k]), fmt_f64(resp.phase_deg[k]));
    }
    s
}

pub fn trace_csv(resp: &StepResponse) -> String {
    let mut s = String::from("t_s,y\n");
    for (t, y) in resp.t.iter().zip(&resp.y) {
        let _ = writeln!(s, "{},{}", fmt_f64(*t), fmt_f64(*y));
    }
    s
}

pub fn margins_json(m: &MarginReport) -> Value {
    json!({
        "phase_margin_deg": num(m.phase_margin_deg),
        "gain_margin_db": num(m.gain_margin_db),
        "gain_crossover_rad_s": opt(m.gain_crossover_rad_s),
        "phase_crossover_rad_s": opt(m.phase_crossover_rad_s),
        "gain_crossings": m.gain_crossings,
        "phase_crossings": m.phase_crossings,
    })
}

pub fn stability_json(r: &StabilityReport) -> Value {
    let roots: Vec<Value> = r
        .roots
        .iter()
        .map(|rv| {
            json!({
                "re": num(rv.root.re),
                "im": num(rv.root.im),
                "arg_rad": num(rv.arg),
                "arg_deg": num(rv.arg.to_degrees()),
                "satisfies_sector": rv.satisfies_sector,
                "on_boundary": rv.on_boundary,
            })
        })
        .collect();
    json!({
        "base_v": r.base_v,
        "sector_half_angle_rad": num(r.sector_half_angle),
        "verdict": r.verdict.as_str(),
        "roots": roots,
    })
}

fn poly_json(p: &FractionalPoly) -> Value {
    json!({ "base_v": p.base_v(), "coeffs": nums(p.coeffs()) })
}

pub fn internal_stability_json(r: &InternalStabilityReport) -> Value {
    let maps: Vec<Value> = r
        .maps
        .iter()
        .map(|m| {
            json!({
                "name": m.name,
                "formula": m.formula,
                "tf": tf_to_json(&m.tf),
                "verdict": m.report.verdict.as_str(),
            })
        })
        .collect();
    let roots = r.maps.first().map(|m| stability_json(&m.report)["roots"].clone()).unwrap_or(Value::Null);
    json!({
        "verdict": r.verdict.as_str(),
        "characteristic": poly_json(&r.characteristic),
        "characteristic_roots": roots,
        "maps": maps,
    })
}

pub fn fit_config_json(c: &FitConfig) -> Value {
    json!({
        "omega_min": num(c.omega_min),
        "omega_max": num(c.omega_max),
        "n_points": c.n_points,
        "num_order": c.num_order,
        "den_order": c.den_order,
        "weights": nums(&c.weights),
        "sk_iterations": c.sk_iterations,
        "error_measure": match c.error_measure {
            ErrorMeasure::Absolute => "absolute",
            ErrorMeasure::Relative => "relative",
        },
        "minimax_iterations": c.minimax_iterations,
        "phase_deg_per_db": num(c.phase_deg_per_db),
    })
}

/// Partial [`FitConfig`] document; absent fields keep their current value.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfigDoc {
    pub omega_min: Option<f64>,
    pub omega_max: Option<f64>,
    pub n_points: Option<usize>,
    pub num_order: Option<usize>,
    pub den_order: Option<usize>,
    pub weights: Option<Vec<f64>>,
    pub sk_iterations: Option<usize>,
    pub error_measure: Option<String>,
    pub minimax_iterations: Option<usize>,
    pub phase_deg_per_db: Option<f64>,
}

impl FitConfigDoc {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Parse(format!("fit config: {e}")))
    }

    pub fn apply(self, cfg: &mut FitConfig) -> Result<(), CliError> {
        macro_rules! set {
            ($($f:ident),*) => { $(if let Some(x) = self.$f { cfg.$f = x; })* };
        }
        set!(omega_min, omega_max, n_points, num_order, den_order, weights, sk_iterations, minimax_iterations, phase_deg_per_db);
        if let Some(m) = self.error_measure {
            cfg.error_measure = parse_error_measure(&m)?;
        }
        Ok(())
    }
}

pub fn parse_error_measure(s: &str) -> Result<ErrorMeasure, CliError> {
    match s {
        "relative" => Ok(ErrorMeasure::Relative),
        "absolute" => Ok(ErrorMeasure::Absolute),
        other => Err(CliError::Parse(format!("error_measure must be \"relative\" or \"absolute\", got {other:?}"))),
    }
}

pub fn fit_json(r: &FitReport, cfg: &FitConfig) -> Value {
    json!({
        "model": rational_to_json(&r.model),
        "max_mag_error_db": num(r.max_mag_error_db),
        "max_phase_error_deg": num(r.max_phase_error_deg),
        "residuals": nums(&r.residuals),
        "selected_iteration": r.selected_iteration,
        "improved_over_levi": r.improved_over_levi,
        "den_roots": r.den_roots.iter().map(|z| complex(*z)).collect::<Vec<_>>(),
        "config": fit_config_json(cfg),
    })
}

pub fn metrics_json(m: &StepMetrics) -> Value {
    json!({
        "y_bar": num(m.y_bar),
        "r_us": num(m.r_us),
        "r_us_unclamped": num(m.r_us_unclamped),
        "r_os": num(m.r_os),
        "settling_time_s": num(m.settling_time_s),
        "undershoot_lower_bound": opt(m.undershoot_lower_bound),
        "settled": m.settled,
    })
}
