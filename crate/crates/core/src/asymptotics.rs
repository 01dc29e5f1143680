//! Richardson extrapolation of sequences with expansions in `n^{-1/2}`, and
//! checks of the large-`n` behaviour of the crossing data.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::degennes::DeGennesConstants;
use crate::error::{Error, Result};
use crate::intersections::CrossingPoint;

/// Values `yₙ` assumed to behave like `ℓ + c₁n^{-1/2} + c₂n^{-1} + ...`.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct HalfPowerSequence {
    values: Vec<(u32, f64)>,
}

impl HalfPowerSequence {
    pub fn new(values: Vec<(u32, f64)>) -> Result<Self> {
        if values.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::InvalidParams("sequence indices must be strictly increasing".into()));
        }
        if let Some((n, v)) = values.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidParams(format!("non-finite value {v} at index {n}")));
        }
        Ok(HalfPowerSequence { values })
    }

    pub fn values(&self) -> &[(u32, f64)] {
        &self.values
    }

    pub fn get(&self, n: u32) -> Option<f64> {
        self.values
            .binary_search_by_key(&n, |&(i, _)| i)
            .ok()
            .map(|i| self.values[i].1)
    }

    pub fn last(&self) -> Option<(u32, f64)> {
        self.values.last().copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map(&self, f: impl Fn(u32, f64) -> f64) -> Result<Self> {
        Self::new(self.values.iter().map(|&(n, v)| (n, f(n, v))).collect())
    }
}

/// One elimination step `zₙ = (2^{k/2} y₂ₙ - yₙ) / (2^{k/2} - 1)`. Index 0
/// pairs with itself and is skipped.
pub fn richardson_step(seq: &HalfPowerSequence, k: u32) -> Result<HalfPowerSequence> {
    if k == 0 {
        return Err(Error::InvalidParams("Richardson order must be positive".into()));
    }
    let lookup: BTreeMap<u32, f64> = seq.values.iter().copied().collect();
    let w = 2f64.powf(0.5 * f64::from(k));
    let out: Vec<(u32, f64)> = seq
        .values
        .iter()
        .filter(|&&(n, _)| n > 0)
        .filter_map(|&(n, y)| {
            let y2 = *lookup.get(&n.checked_mul(2)?)?;
            Some((n, (w * y2 - y) / (w - 1.0)))
        })
        .collect();
    if out.is_empty() {
        return Err(Error::InsufficientData("no index pair (n, 2n) in sequence".into()));
    }
    HalfPowerSequence::new(out)
}

/// `[R₁, ..., R_depth]`, each step eliminating the next half power.
pub fn richardson_table(seq: &HalfPowerSequence, depth: u32) -> Result<Vec<HalfPowerSequence>> {
    let mut out = Vec::with_capacity(depth as usize);
    let mut current = seq.clone();
    for k in 1..=depth {
        current = richardson_step(&current, k)?;
        out.push(current.clone());
    }
    Ok(out)
}

/// `γₙ = βₙ₊₁ - βₙ` over consecutive crossings. `γ₀` is kept in the sequence;
/// extrapolation never uses it.
pub fn gamma_sequence(crossings: &[CrossingPoint]) -> Result<HalfPowerSequence> {
    if crossings.windows(2).any(|w| w[1].n != w[0].n + 1) {
        return Err(Error::InvalidParams("crossings must be consecutive in n".into()));
    }
    HalfPowerSequence::new(
        crossings
            .windows(2)
            .map(|w| (w[0].n, w[1].beta_n - w[0].beta_n))
            .collect(),
    )
}

/// Comparison of an extrapolated limit with its predicted value.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimitCheck {
    pub label: String,
    /// Index at which the extrapolated value is read.
    pub index: u32,
    pub value: f64,
    pub target: f64,
    pub tolerance: f64,
    /// `|R₃ - R₄|` at `index`.
    pub depth_gap: f64,
}

impl LimitCheck {
    pub fn passed(&self) -> bool {
        (self.value - self.target).abs() <= self.tolerance
    }
}

/// `R₄` at its largest index together with the depth-3/depth-4 gap there.
pub fn extrapolated_limit(seq: &HalfPowerSequence) -> Result<(u32, f64, f64)> {
    let table = richardson_table(seq, 4)?;
    let (n, r4) = table[3].last().expect("non-empty");
    let r3 = table[2].get(n).expect("R3 covers every R4 index");
    Ok((n, r4, (r3 - r4).abs()))
}

fn limit_check(label: &str, seq: &HalfPowerSequence, target: f64, tolerance: f64) -> Result<LimitCheck> {
    let (index, value, depth_gap) = extrapolated_limit(seq)?;
    Ok(LimitCheck {
        label: label.to_string(),
        index,
        value,
        target,
        tolerance,
        depth_gap,
    })
}

fn from_crossings(crossings: &[CrossingPoint], f: impl Fn(&CrossingPoint) -> f64) -> Result<HalfPowerSequence> {
    HalfPowerSequence::new(crossings.iter().filter(|c| c.n > 0).map(|c| (c.n, f(c))).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpansionReport {
    pub checks: Vec<LimitCheck>,
}

impl ExpansionReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(LimitCheck::passed)
    }

    pub fn find(&self, label: &str) -> Option<&LimitCheck> {
        self.checks.iter().find(|c| c.label == label)
    }
}

/// `κ̂₀ = 1 - 2δ₀ + 2ξ₀²`.
pub fn kappa0(constants: &DeGennesConstants) -> f64 {
    1.0 - 2.0 * constants.delta0_formula + 2.0 * constants.xi0 * constants.xi0
}

/// `ξ₁ = -2^{3/2} ξ₀`.
pub fn xi1(constants: &DeGennesConstants) -> f64 {
    -(2f64.powf(1.5)) * constants.xi0
}

/// `βₙ = 2n + ξ₁√n + κ̂₀ + O(n^{-1/2})`.
pub fn beta_expansion_check(crossings: &[CrossingPoint], constants: &DeGennesConstants) -> Result<ExpansionReport> {
    let (xi1, k0) = (xi1(constants), kappa0(constants));
    let r1 = from_crossings(crossings, |c| {
        let n = f64::from(c.n);
        c.beta_n - 2.0 * n - xi1 * n.sqrt()
    })?;
    let r2 = r1.map(|_, v| v - k0)?;
    let (n_last, r2_last) = r2.last().expect("non-empty");
    Ok(ExpansionReport {
        checks: vec![
            limit_check("r1_limit", &r1, k0, 5e-3)?,
            limit_check("r2_limit", &r2, 0.0, 5e-3)?,
            LimitCheck {
                label: "r2_tail".into(),
                index: n_last,
                value: r2_last,
                target: 0.0,
                tolerance: 0.15,
                depth_gap: 0.0,
            },
        ],
    })
}

/// `ηₙ* = Θ₀ - C₁βₙ^{-1/2} + 3C₁Θ₀^{1/2}(¼ + C₀)βₙ⁻¹ + ...`.
pub fn eta_star_expansion_check(
    crossings: &[CrossingPoint],
    constants: &DeGennesConstants,
) -> Result<ExpansionReport> {
    let (theta0, c1) = (constants.theta0, constants.c1);
    let s = from_crossings(crossings, |c| (theta0 - c.eta_star) * c.beta_n.sqrt())?;
    let t = from_crossings(crossings, |c| (theta0 - c.eta_star) * c.beta_n - c1 * c.beta_n.sqrt())?;
    let last = crossings.last().ok_or_else(|| Error::InsufficientData("no crossings".into()))?;
    let gap = theta0 - last.eta_star;
    let leading = c1 / last.beta_n.sqrt();
    Ok(ExpansionReport {
        checks: vec![
            limit_check("s_limit", &s, c1, 2e-3)?,
            limit_check("t_limit", &t, -3.0 * c1 * theta0.sqrt() * (0.25 + constants.c0_fit), 1e-2)?,
            LimitCheck {
                label: "leading_gap_ratio".into(),
                index: last.n,
                value: gap / leading,
                target: 1.0,
                tolerance: 1e-2,
                depth_gap: 0.0,
            },
        ],
    })
}

/// `δ(m, β) = m - β/2 - ξ₀√β`.
pub fn delta(m: f64, beta: f64, xi0: f64) -> f64 {
    m - 0.5 * beta - xi0 * beta.sqrt()
}

/// `δ(n, βₙ) → δ₀ - ½` and `δ(n+1, βₙ) → δ₀ + ½`.
pub fn delta_at_crossings_check(crossings: &[CrossingPoint], constants: &DeGennesConstants) -> Result<ExpansionReport> {
    let xi0 = constants.xi0;
    let d0 = constants.delta0_formula;
    let left = from_crossings(crossings, |c| delta(f64::from(c.n), c.beta_n, xi0))?;
    let right = from_crossings(crossings, |c| delta(f64::from(c.n) + 1.0, c.beta_n, xi0))?;
    Ok(ExpansionReport {
        checks: vec![
            limit_check("delta_left_limit", &left, d0 - 0.5, 2e-3)?,
            limit_check("delta_right_limit", &right, d0 + 0.5, 2e-3)?,
        ],
    })
}

/// Least-squares slope of `log|yₙ - target|` against `log n` over
/// `from ≤ n ≤ to`.
pub fn log_log_slope(seq: &HalfPowerSequence, target: f64, from: u32, to: u32) -> Result<f64> {
    let pts: Vec<(f64, f64)> = seq
        .values()
        .iter()
        .filter(|&&(n, _)| n >= from && n <= to)
        .map(|&(n, v)| (f64::from(n).ln(), (v - target).abs().ln()))
        .filter(|(_, y)| y.is_finite())
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} usable points for the slope fit in [{from}, {to}]",
            pts.len()
        )));
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}
