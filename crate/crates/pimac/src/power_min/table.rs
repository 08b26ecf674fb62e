use super::{ccp_min_power_rates, Demands, PowerError, PowerOptions, PowerResult};
use crate::model::{ChannelInstance, RateProfile, TransmitCovariance};
use crate::rate_region::{max_sum_rate, RegionOptions, Signaling};

/// Boundary point of the rate region followed by the cheapest way to
/// reach it under successive decoding.
#[derive(Debug, Clone, PartialEq)]
pub struct SuccessiveOpt {
    /// Rate triple on the region boundary.
    pub rates: [f64; 3],
    /// Power spent by the boundary point.
    pub boundary_power: f64,
    pub single: PowerResult,
    pub extended: PowerResult,
    /// `1 − P(N=1)/P′`, `None` when undefined.
    pub saving_single: Option<f64>,
    /// `1 − P(N)/P(N=1)`, `None` when undefined.
    pub saving_extended: Option<f64>,
    /// Decoding orders of the cheapest single-symbol and extended solutions.
    pub single_order: Vec<usize>,
    pub extended_order: Vec<usize>,
}

fn saving(num: &PowerResult, den: f64) -> Option<f64> {
    (num.is_feasible() && den > 1e-12).then(|| 1.0 - num.total / den)
}

/// Maximizes the sum rate along `profile` at the channel's caps, then
/// minimizes the power that meets those rates without and with a symbol
/// extension of length `n`, over every successive decoding order of the MAC
/// users. The power program runs on `power_ch` (same gains, typically with
/// loose caps); each extended run is seeded with the replicated
/// single-symbol solution of the same order.
pub fn successive_opt(
    profile: &RateProfile,
    ch: &ChannelInstance,
    power_ch: &ChannelInstance,
    n: usize,
    region: &RegionOptions,
    opts: &PowerOptions,
) -> Result<SuccessiveOpt, PowerError> {
    let point = max_sum_rate(profile, ch, Signaling::Improper, region)?;
    let boundary_power: f64 = point.signals.iter().map(|s| s.variance()).sum();
    let demands = Demands::RatePerUser(point.rates.to_vec());
    let mut single: Option<(PowerResult, Vec<usize>)> = None;
    let mut extended: Option<(PowerResult, Vec<usize>)> = None;
    for order in orders(ch.users() - 1) {
        let one = ccp_min_power_rates(power_ch, &demands, 1, &order, opts, &[])?;
        let many = if n == 1 {
            one.clone()
        } else {
            let seeds: Vec<Vec<TransmitCovariance>> = if one.is_feasible() {
                vec![one.covariances.iter().map(|q| q.replicated(n)).collect()]
            } else {
                Vec::new()
            };
            ccp_min_power_rates(power_ch, &demands, n, &order, opts, &seeds)?
        };
        keep_cheaper(&mut single, one, &order);
        keep_cheaper(&mut extended, many, &order);
    }
    let (single, single_order) = single.expect("at least one order");
    let (extended, extended_order) = extended.expect("at least one order");
    Ok(SuccessiveOpt {
        rates: point.rates,
        boundary_power,
        saving_single: saving(&single, boundary_power),
        saving_extended: saving(&extended, single.total),
        single,
        extended,
        single_order,
        extended_order,
    })
}

fn keep_cheaper(best: &mut Option<(PowerResult, Vec<usize>)>, r: PowerResult, order: &[usize]) {
    if best.as_ref().is_none_or(|(b, _)| r.total < b.total) {
        *best = Some((r, order.to_vec()));
    }
}

/// All permutations of `0..m` in lexicographic order.
fn orders(m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(m);
    let mut used = vec![false; m];
    fn walk(m: usize, cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == m {
            out.push(cur.clone());
            return;
        }
        for i in 0..m {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                walk(m, cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    walk(m, &mut cur, &mut used, &mut out);
    out
}
