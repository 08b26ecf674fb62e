//! Browser bindings: three small operations on the builtin channels, each
//! returning a JSON string.

use pimac::model::{ChannelInstance, RateProfile};
use pimac::power_min::{proper_min_power_rates, Demands};
use pimac::rate_region::{max_p2p_given_mac, max_sum_rate, RegionOptions, RegionPoint, Signaling};
use serde::Serialize;
use wasm_bindgen::prelude::*;

const H1: [[(f64, f64); 3]; 2] = [
    [(2.03, -0.68), (2.1, 2.64), (3.2, 1.48)],
    [(4.7, 1.97), (4.5, -0.66), (2.85, 2.41)],
];

const H2: [[(f64, f64); 3]; 2] = [
    [(3.2, -0.72), (2.3, 2.52), (1.9, 1.35)],
    [(2.8, 1.68), (2.5, -0.76), (3.4, 2.23)],
];

fn channel(name: &str, cap: f64) -> Result<ChannelInstance, String> {
    let rows = match name {
        "H1" => H1,
        "H2" => H2,
        _ => return Err(format!("unknown channel {name:?}")),
    };
    ChannelInstance::from_polar(&[rows[0].to_vec(), rows[1].to_vec()], 1.0, vec![cap; 3]).map_err(|e| e.to_string())
}

fn signaling(improper: bool) -> Signaling {
    if improper {
        Signaling::Improper
    } else {
        Signaling::Proper
    }
}

#[derive(Serialize)]
struct Point {
    value: f64,
    rates: [f64; 3],
    powers: Vec<f64>,
    pseudo_variances: Vec<[f64; 2]>,
    relaxation_bound: f64,
}

impl From<RegionPoint> for Point {
    fn from(p: RegionPoint) -> Self {
        Self {
            value: p.value,
            rates: p.rates,
            powers: p.signals.iter().map(|s| s.variance()).collect(),
            pseudo_variances: p.signals.iter().map(|s| [s.pseudo_variance().re, s.pseudo_variance().im]).collect(),
            relaxation_bound: p.relaxation_bound,
        }
    }
}

/// Faster settings for interactive use.
fn options() -> RegionOptions {
    let mut o = RegionOptions { refine_starts: 4, ..RegionOptions::default() };
    o.solver.k_rand = 100;
    o
}

fn json<T: Serialize>(x: &T) -> Result<String, String> {
    serde_json::to_string(x).map_err(|e| e.to_string())
}

/// Largest sum rate along the rate profile `a`, unit caps.
pub fn sum_rate_json(name: &str, a: [f64; 3], improper: bool) -> Result<String, String> {
    let ch = channel(name, 1.0)?;
    let profile = RateProfile::from_direction(a).map_err(|e| e.to_string())?;
    let p = max_sum_rate(&profile, &ch, signaling(improper), &options()).map_err(|e| e.to_string())?;
    json(&Point::from(p))
}

/// Largest P2P rate while both MAC users get `r_mac`, unit caps.
pub fn p2p_rate_json(name: &str, r_mac: f64, improper: bool) -> Result<String, String> {
    let ch = channel(name, 1.0)?;
    let p = max_p2p_given_mac(r_mac, &ch, signaling(improper), &options()).map_err(|e| e.to_string())?;
    json(&Point::from(p))
}

#[derive(Serialize)]
struct Power {
    feasible: bool,
    total: Option<f64>,
    per_user: Vec<f64>,
}

/// Least proper-signaling power giving every user `beta` bits per channel
/// use, base station decoding MAC user `first` (0 or 1) first.
pub fn proper_power_json(name: &str, beta: f64, first: usize) -> Result<String, String> {
    let ch = channel(name, 1e6)?;
    let order = match first {
        0 => [0, 1],
        1 => [1, 0],
        _ => return Err("first must be 0 or 1".into()),
    };
    let r = proper_min_power_rates(&ch, &Demands::uniform_rate(3, beta), &order).map_err(|e| e.to_string())?;
    let feasible = r.is_feasible();
    json(&Power { feasible, total: feasible.then_some(r.total), per_user: if feasible { r.per_user } else { Vec::new() } })
}

#[wasm_bindgen]
pub fn sum_rate(channel: &str, a1: f64, a2: f64, a3: f64, improper: bool) -> Result<String, JsError> {
    sum_rate_json(channel, [a1, a2, a3], improper).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn p2p_rate(channel: &str, r_mac: f64, improper: bool) -> Result<String, JsError> {
    p2p_rate_json(channel, r_mac, improper).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn proper_power(channel: &str, beta: f64, first: usize) -> Result<String, JsError> {
    proper_power_json(channel, beta, first).map_err(|e| JsError::new(&e))
}
