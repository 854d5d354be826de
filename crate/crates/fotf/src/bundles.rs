//! Scripted reproductions of the worked examples.
//!
//! Every input is pinned by a fixture file compiled into the binary.

use std::fmt::Write as _;

use fotf_core::analysis::{
    frequency_response, internal_stability, margins, FrequencyGrid, FrequencyResponse, InternalStabilityReport,
    MarginReport,
};
use fotf_core::approx::{augment, fit_rational, fractional_response_of, FitConfig, FitReport, RationalTf};
use fotf_core::timedomain::{step_of_fractional, FractionalStep, StepConfig};
use fotf_core::{make_canceller, make_ratio_canceller, CancellerSpec, CommensurateTf, Complex64};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::io::{self, fmt_f64, num, FitConfigDoc};
use crate::CliError;

pub const EXAMPLE1_FIXTURE: &str = include_str!("../fixtures/example1.json");
pub const EXAMPLE2_FIXTURE: &str = include_str!("../fixtures/example2.json");
pub const INTERNAL_STABILITY_FIXTURE: &str = include_str!("../fixtures/internal_stability.json");
pub const PENDULUM_FIXTURE: &str = include_str!("../fixtures/pendulum.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ExampleId {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
    InternalStability,
    PendulumFit,
}

/// Summary document plus named artifact files.
#[derive(Debug, Clone, PartialEq)]
pub struct Bundle {
    pub summary: Value,
    pub files: Vec<(String, String)>,
}

fn fixture<T: for<'de> Deserialize<'de>>(name: &str, text: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Parse(format!("fixture {name}: {e}")))
}

fn fit_config(doc: FitConfigDoc) -> Result<FitConfig, CliError> {
    let mut cfg = FitConfig::new(1e-3, 1e3, 8, 8);
    doc.apply(&mut cfg)?;
    Ok(cfg)
}

#[derive(Deserialize)]
struct NamedTf {
    name: String,
    tf: Value,
}

#[derive(Deserialize)]
struct StepDoc {
    t_max: f64,
    dt: f64,
    band: f64,
    lambda: Option<f64>,
}

#[derive(Deserialize)]
struct Example1Doc {
    plants: Vec<NamedTf>,
    fit: FitConfigDoc,
    step: StepDoc,
}

pub struct Example1 {
    pub fit: FitConfig,
    pub step: StepConfig,
    pub plants: Vec<(String, CommensurateTf, FractionalStep)>,
}

impl Example1 {
    pub fn r_us(&self) -> Vec<f64> {
        self.plants.iter().map(|p| p.2.metrics.r_us).collect()
    }

    pub fn settling_times(&self) -> Vec<f64> {
        self.plants.iter().map(|p| p.2.metrics.settling_time_s).collect()
    }

    /// `r_us` strictly decreasing and positive.
    pub fn undershoot_ordered(&self) -> bool {
        let r = self.r_us();
        r.windows(2).all(|w| w[0] > w[1]) && r.last().is_some_and(|x| *x > 0.0)
    }

    /// Settling time strictly increasing, with every system settled.
    pub fn settling_ordered(&self) -> bool {
        let t = self.settling_times();
        t.windows(2).all(|w| w[0] < w[1]) && self.plants.iter().all(|p| p.2.metrics.settled)
    }

    /// `r_us >= 0.5 / (e^(lambda T) - 1)` for every system.
    pub fn bound_consistent(&self) -> bool {
        self.plants
            .iter()
            .all(|p| p.2.metrics.undershoot_lower_bound.is_some_and(|b| p.2.metrics.r_us >= 0.5 * b))
    }
}

pub fn example1() -> Result<Example1, CliError> {
    let doc: Example1Doc = fixture("example1", EXAMPLE1_FIXTURE)?;
    let fit = fit_config(doc.fit)?;
    let step = StepConfig { t_max: doc.step.t_max, dt: doc.step.dt, band: doc.step.band, lambda: doc.step.lambda };
    let mut plants = Vec::new();
    for p in doc.plants {
        let tf = io::tf_from_value(p.tf)?;
        let out = step_of_fractional(&tf, &fit, &step)?;
        plants.push((p.name, tf, out));
    }
    Ok(Example1 { fit, step, plants })
}

#[derive(Deserialize)]
struct GridDoc {
    omega_min: f64,
    omega_max: f64,
    points: usize,
}

#[derive(Deserialize)]
struct ReferenceDoc {
    phase_margin_deg: Vec<f64>,
    gain_margin_db: Vec<f64>,
}

#[derive(Deserialize)]
struct Example2Doc {
    plant: Value,
    cancellers: Vec<CancellerSpecDoc>,
    grid: GridDoc,
    reference: ReferenceDoc,
}

#[derive(Deserialize)]
struct CancellerSpecDoc {
    lambda: f64,
    v: u32,
}

pub struct MarginRow {
    pub label: String,
    pub tf: CommensurateTf,
    pub response: FrequencyResponse,
    pub report: MarginReport,
}

pub struct Example2 {
    pub rows: Vec<MarginRow>,
    pub reference_phase_margin_deg: Vec<f64>,
    pub reference_gain_margin_db: Vec<f64>,
}

pub fn example2() -> Result<Example2, CliError> {
    let doc: Example2Doc = fixture("example2", EXAMPLE2_FIXTURE)?;
    let grid = FrequencyGrid::log_space(doc.grid.omega_min, doc.grid.omega_max, doc.grid.points)?;
    let plant = io::tf_from_value(doc.plant)?;
    let mut loops = vec![("P".to_string(), plant.clone())];
    for c in &doc.cancellers {
        let q = make_canceller(CancellerSpec::new(c.lambda, c.v)?)?;
        loops.push((format!("P/Q_{{{},{}}}", fmt_f64(c.lambda), c.v), plant.quotient(&q)?));
    }
    let mut rows = Vec::new();
    for (label, tf) in loops {
        let response = frequency_response(&tf, &grid);
        let report = margins(&response)?;
        rows.push(MarginRow { label, tf, response, report });
    }
    Ok(Example2 {
        rows,
        reference_phase_margin_deg: doc.reference.phase_margin_deg,
        reference_gain_margin_db: doc.reference.gain_margin_db,
    })
}

#[derive(Deserialize)]
struct InternalStabilityDoc {
    plant: Value,
    controller: Value,
    unstable_controller: Value,
}

pub struct InternalStabilityExample {
    pub plant: CommensurateTf,
    pub controller: CommensurateTf,
    pub report: InternalStabilityReport,
    pub unstable_controller: CommensurateTf,
    pub unstable_report: InternalStabilityReport,
}

pub fn internal_stability_example() -> Result<InternalStabilityExample, CliError> {
    let doc: InternalStabilityDoc = fixture("internal_stability", INTERNAL_STABILITY_FIXTURE)?;
    let plant = io::tf_from_value(doc.plant)?;
    let controller = io::tf_from_value(doc.controller)?;
    let unstable_controller = io::tf_from_value(doc.unstable_controller)?;
    let report = internal_stability(&plant, &controller)?;
    let unstable_report = internal_stability(&plant, &unstable_controller)?;
    Ok(InternalStabilityExample { plant, controller, report, unstable_controller, unstable_report })
}

#[derive(Deserialize)]
struct PendulumDoc {
    g: f64,
    l: f64,
    m: f64,
    #[serde(rename = "M")]
    cart_mass: f64,
    core_fit: FitConfigDoc,
    canceller_v: u32,
    canceller_fit: FitConfigDoc,
}

pub struct PendulumFit {
    /// Unstable pole.
    pub p: f64,
    /// Non-minimum phase zero.
    pub z: f64,
    pub cart_mass: f64,
    /// `(s^(1/2) - z^(1/2)) / (M (s^(1/2) - p^(1/2)) (s + p))`
    pub core: CommensurateTf,
    pub core_cfg: FitConfig,
    pub core_target: FrequencyResponse,
    pub core_fit: FitReport,
    /// Fitted core times `(s + z) / s^2`.
    pub augmented: RationalTf,
    /// Largest relative deviation of `augmented` from the fitted core times
    /// `(s + z) / s^2` over the check points.
    pub augmentation_error: f64,
    /// `Q_{p,v} / Q_{z,v}`
    pub canceller: CommensurateTf,
    pub canceller_cfg: FitConfig,
    pub canceller_fit: FitReport,
}

/// 100 points spread over four decades of modulus and both half-planes.
pub fn augmentation_check_points() -> Vec<Complex64> {
    let mut out = Vec::with_capacity(100);
    for i in 0..10 {
        let r = 10f64.powf(-2.0 + 4.0 * i as f64 / 9.0);
        for k in 0..10 {
            let theta = -3.0 + 6.0 * (k as f64 + 0.5) / 10.0;
            out.push(Complex64::from_polar(r, theta));
        }
    }
    out
}

pub fn pendulum_fit() -> Result<PendulumFit, CliError> {
    let doc: PendulumDoc = fixture("pendulum", PENDULUM_FIXTURE)?;
    let p = (doc.g / doc.l + doc.m * doc.g / (doc.cart_mass * doc.l)).sqrt();
    let z = (doc.g / doc.l).sqrt();
    let mass = doc.cart_mass;
    let (sp, sz) = (p.sqrt(), z.sqrt());
    // M (w - p^(1/2)) (w^2 + p), ascending in w = s^(1/2)
    let den = vec![-mass * sp * p, mass * p, -mass * sp, mass];
    let core = CommensurateTf::from_w_coeffs(2, vec![-sz, 1.0], den)?;

    let core_cfg = fit_config(doc.core_fit)?;
    let core_target = fractional_response_of(&core, &core_cfg)?;
    let core_fit = fit_rational(&core_target, &core_cfg)?;
    let augmented = augment(&core_fit.model, &[Complex64::new(-z, 0.0)], 2)?;
    let mut augmentation_error: f64 = 0.0;
    for s in augmentation_check_points() {
        let expect = core_fit.model.evaluate(s)? * (s + z) / (s * s);
        let got = augmented.evaluate(s)?;
        augmentation_error = augmentation_error.max((got - expect).norm() / expect.norm());
    }

    let canceller = make_ratio_canceller(p, z, doc.canceller_v)?;
    let canceller_cfg = fit_config(doc.canceller_fit)?;
    let canceller_fit = fit_rational(&fractional_response_of(&canceller, &canceller_cfg)?, &canceller_cfg)?;

    Ok(PendulumFit {
        p,
        z,
        cart_mass: mass,
        core,
        core_cfg,
        core_target,
        core_fit,
        augmented,
        augmentation_error,
        canceller,
        canceller_cfg,
        canceller_fit,
    })
}

pub fn reproduce_example(id: ExampleId) -> Result<Bundle, CliError> {
    match id {
        ExampleId::One => example1().map(|e| bundle1(&e)),
        ExampleId::Two => example2().map(|e| bundle2(&e)),
        ExampleId::InternalStability => internal_stability_example().map(|e| bundle_internal(&e)),
        ExampleId::PendulumFit => pendulum_fit().map(|e| bundle_pendulum(&e)),
    }
}

fn bundle1(e: &Example1) -> Bundle {
    let mut files = Vec::new();
    let systems: Vec<Value> = e
        .plants
        .iter()
        .map(|(name, tf, out)| {
            files.push((format!("example1_{name}_trace.csv"), io::trace_csv(&out.response)));
            json!({
                "name": name,
                "tf": io::tf_to_json(tf),
                "realization": io::rational_to_json(&out.realization),
                "fit_max_mag_error_db": num(out.fit.max_mag_error_db),
                "fit_max_phase_error_deg": num(out.fit.max_phase_error_deg),
                "diverged": out.response.diverged,
                "metrics": io::metrics_json(&out.metrics),
            })
        })
        .collect();
    let summary = json!({
        "example": "1",
        "fit": io::fit_config_json(&e.fit),
        "step": {
            "t_max": num(e.step.t_max),
            "dt": num(e.step.dt),
            "band": num(e.step.band),
            "lambda": e.step.lambda.map(num).unwrap_or(Value::Null),
        },
        "systems": systems,
        "orderings": {
            "r_us_decreasing": e.undershoot_ordered(),
            "settling_time_increasing": e.settling_ordered(),
            "undershoot_bound_consistent": e.bound_consistent(),
        },
    });
    files.push(("example1_metrics.json".into(), io::to_pretty(&summary)));
    Bundle { summary, files }
}

fn bundle2(e: &Example2) -> Bundle {
    let mut files = Vec::new();
    let mut table = String::from("loop,phase_margin_deg,gain_margin_db,gain_crossover_rad_s,phase_crossover_rad_s\n");
    let rows: Vec<Value> = e
        .rows
        .iter()
        .enumerate()
        .map(|(k, r)| {
            let slug = r.label.replace("/Q_{", "_over_Q").replace('}', "").replace(',', "_");
            files.push((format!("example2_{slug}_bode.csv"), io::bode_csv(&r.response)));
            let cell = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
            let _ = writeln!(
                table,
                "{},{},{},{},{}",
                r.label,
                fmt_f64(r.report.phase_margin_deg),
                fmt_f64(r.report.gain_margin_db),
                cell(r.report.gain_crossover_rad_s),
                cell(r.report.phase_crossover_rad_s)
            );
            let mut row = io::margins_json(&r.report);
            row["loop"] = Value::from(r.label.as_str());
            row["reference_phase_margin_deg"] = e.reference_phase_margin_deg.get(k).copied().map(num).into();
            row["reference_gain_margin_db"] = e.reference_gain_margin_db.get(k).copied().map(num).into();
            row
        })
        .collect();
    files.push(("example2_margins.csv".into(), table));
    let summary = json!({ "example": "2", "rows": rows });
    files.push(("example2_margins.json".into(), io::to_pretty(&summary)));
    Bundle { summary, files }
}

fn bundle_internal(e: &InternalStabilityExample) -> Bundle {
    let summary = json!({
        "example": "internal-stability",
        "plant": io::tf_to_json(&e.plant),
        "controller": io::tf_to_json(&e.controller),
        "report": io::internal_stability_json(&e.report),
        "counterexample": {
            "controller": io::tf_to_json(&e.unstable_controller),
            "report": io::internal_stability_json(&e.unstable_report),
        },
    });
    let files = vec![("internal_stability.json".into(), io::to_pretty(&summary))];
    Bundle { summary, files }
}

fn bundle_pendulum(e: &PendulumFit) -> Bundle {
    let mut bode = String::from("omega_rad_s,target_mag_db,target_phase_deg,fit_mag_db,fit_phase_deg\n");
    let values: Vec<Complex64> = e
        .core_target
        .omega
        .iter()
        .map(|w| e.core_fit.model.evaluate(Complex64::new(0.0, *w)).unwrap_or(Complex64::new(f64::NAN, f64::NAN)))
        .collect();
    let fitted = FrequencyResponse::from_values(e.core_target.omega.clone(), values).ok();
    for k in 0..e.core_target.len() {
        let (fm, fp) = fitted.as_ref().map(|f| (f.mag_db[k], f.phase_deg[k])).unwrap_or((f64::NAN, f64::NAN));
        let t = &e.core_target;
        let _ = writeln!(
            bode,
            "{},{},{},{},{}",
            fmt_f64(t.omega[k]),
            fmt_f64(t.mag_db[k]),
            fmt_f64(t.phase_deg[k]),
            fmt_f64(fm),
            fmt_f64(fp)
        );
    }
    let summary = json!({
        "example": "pendulum-fit",
        "p": num(e.p),
        "z": num(e.z),
        "cart_mass": num(e.cart_mass),
        "core": io::tf_to_json(&e.core),
        "core_fit": io::fit_json(&e.core_fit, &e.core_cfg),
        "augmented": io::rational_to_json(&e.augmented),
        "augmentation_max_relative_error": num(e.augmentation_error),
        "canceller": io::tf_to_json(&e.canceller),
        "canceller_fit": io::fit_json(&e.canceller_fit, &e.canceller_cfg),
    });
    let files = vec![
        ("pendulum_fit_bode.csv".into(), bode),
        ("pendulum_fit.json".into(), io::to_pretty(&summary)),
    ];
    Bundle { summary, files }
}
