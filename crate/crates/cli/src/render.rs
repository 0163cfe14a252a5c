use std::time::Duration;

use dicke_atlas::model::{MeanFieldState, ModelParams, OrderParameters};
use serde_json::{json, Map, Value};

/// Round to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

/// JSON number with 12 significant digits; non-finite values become null.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(round12(x))
    } else {
        Value::Null
    }
}

pub fn opt_num(x: Option<f64>) -> Value {
    x.map_or(Value::Null, num)
}

/// Decimal text for CSV cells.
pub fn text(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    let r = round12(x);
    let a = r.abs();
    if r == 0.0 {
        "0".into()
    } else if (1e-5..1e15).contains(&a) || a.is_infinite() {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

pub fn params_json(p: &ModelParams) -> Value {
    json!({
        "omega": num(p.omega()),
        "Omega": num(p.big_omega()),
        "lambda": num(p.lambda()),
        "kappa": num(p.kappa()),
        "U": num(p.u()),
        "t": opt_num(p.ratio()),
    })
}

pub fn order_json(o: &OrderParameters) -> Value {
    json!({
        "n_photon": num(o.n_photon),
        "jz": num(o.jz),
        "jx": num(o.jx),
        "jy": num(o.jy),
    })
}

pub fn state_json(s: &MeanFieldState, energy: f64) -> Value {
    json!({
        "rho": num(s.rho()),
        "mu": num(s.mu()),
        "theta": num(s.theta()),
        "eta": num(s.eta()),
        "energy": num(energy),
    })
}

pub fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

pub struct Manifest {
    pub command: String,
    pub params: Value,
    pub tolerances: Value,
    pub seed: u64,
}

impl Manifest {
    pub fn to_json(&self, wall: Duration) -> Value {
        json!({
            "command": self.command,
            "params": self.params,
            "tolerances": self.tolerances,
            "seed": self.seed,
            "version": env!("CARGO_PKG_VERSION"),
            "wall_time": wall.as_secs_f64(),
        })
    }
}

/// Attach the manifest as the last key of a report.
pub fn with_manifest(mut body: Map<String, Value>, manifest: &Manifest, wall: Duration) -> Value {
    body.insert("manifest".into(), manifest.to_json(wall));
    Value::Object(body)
}
