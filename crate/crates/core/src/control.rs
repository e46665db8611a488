//! Control functions ρ and their constants
//!
//! ```text
//! (ρ1)  ρ(ε + t) <= L(ε) ρ(t)        (ρ2)  ρ(tε) <= M(ε) ρ(t)        for all t >= 0
//! ```
//!
//! and least-squares classification of how a sequence of minimal control
//! constants grows.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "kebab-case")]
pub enum ControlFunction {
    /// ρ ≡ 1
    Constant,
    /// ρ(t) = Ct + 1
    Affine { c: f64 },
    /// ρ(t) = Ct^p + 1
    Power { c: f64, p: f64 },
    /// ρ(t) = 1 + C log(1 + t)
    Log { c: f64 },
    /// Piecewise linear through `(t, ρ(t))` knots starting at (0, 1),
    /// constant after the last knot.
    Table { knots: Vec<(f64, f64)> },
}

impl ControlFunction {
    pub fn affine(c: f64) -> Self {
        ControlFunction::Affine { c }
    }

    pub fn validate(&self) -> Result<()> {
        let nonneg = |v: f64, what: &str| {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(invalid(format!(
                    "control function: {what} must be a nonnegative number, got {v}"
                )))
            }
        };
        match *self {
            ControlFunction::Constant => Ok(()),
            ControlFunction::Affine { c } | ControlFunction::Log { c } => nonneg(c, "C"),
            ControlFunction::Power { c, p } => {
                nonneg(c, "C")?;
                if !(p > 0.0) || !p.is_finite() {
                    return Err(invalid(format!("control function: exponent must be positive, got {p}")));
                }
                Ok(())
            }
            ControlFunction::Table { ref knots } => {
                if knots.first() != Some(&(0.0, 1.0)) {
                    return Err(invalid("control table must start at (0, 1)"));
                }
                for w in knots.windows(2) {
                    let ((t0, v0), (t1, v1)) = (w[0], w[1]);
                    if !(t1 > t0) || !(v1 >= v0) || !v1.is_finite() || !t1.is_finite() {
                        return Err(invalid(format!(
                            "control table must have increasing t and non-decreasing values, got ({t0}, {v0}) then ({t1}, {v1})"
                        )));
                    }
                }
                Ok(())
            }
        }
    }

    /// ρ(t) for t >= 0.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(invalid(format!("control functions are defined for t >= 0, got {t}")));
        }
        Ok(self.at(t))
    }

    /// ρ(t) without the domain check; negative t is treated as 0.
    pub fn at(&self, t: f64) -> f64 {
        let t = t.max(0.0);
        match *self {
            ControlFunction::Constant => 1.0,
            ControlFunction::Affine { c } => c * t + 1.0,
            ControlFunction::Power { c, p } => c * t.powf(p) + 1.0,
            ControlFunction::Log { c } => 1.0 + c * t.ln_1p(),
            ControlFunction::Table { ref knots } => {
                let i = knots.partition_point(|&(s, _)| s <= t);
                if i >= knots.len() {
                    return knots.last().map_or(1.0, |k| k.1);
                }
                let (t0, v0) = knots[i - 1];
                let (t1, v1) = knots[i];
                v0 + (v1 - v0) * (t - t0) / (t1 - t0)
            }
        }
    }

    /// L(ε) and M(ε), closed form where available, otherwise a refined
    /// numerical supremum. Both are checked on the verification grid.
    pub fn constants(&self, eps: f64) -> Result<ControlConstants> {
        self.validate()?;
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(invalid(format!("control constants need ε > 0, got {eps}")));
        }
        let (l, l_closed) = match *self {
            ControlFunction::Constant => (1.0, true),
            ControlFunction::Affine { c } => (1.0 + c * eps, true),
            ControlFunction::Power { c, p } if p <= 1.0 => (1.0 + c * eps.powf(p), true),
            ControlFunction::Log { c } => (1.0 + c * eps.ln_1p(), true),
            _ => (numeric_sup(|t| self.at(eps + t) / self.at(t)), false),
        };
        let (m, m_closed) = match *self {
            ControlFunction::Constant => (1.0, true),
            ControlFunction::Affine { c } | ControlFunction::Power { c, .. } if c == 0.0 => (1.0, true),
            ControlFunction::Affine { .. } => (eps.max(1.0), true),
            ControlFunction::Power { p, .. } => (eps.powf(p).max(1.0), true),
            ControlFunction::Log { .. } if eps <= 1.0 => (1.0, true),
            _ => (numeric_sup(|t| self.at(t * eps) / self.at(t)), false),
        };
        let check = self.verify_constants(eps, l, m);
        if check.l_violation.is_some() || check.m_violation.is_some() {
            return Err(Error::Assertion(format!(
                "control constants for {self} at ε = {eps} fail the grid check: {check:?}"
            )));
        }
        Ok(ControlConstants {
            eps,
            l,
            m,
            l_closed_form: l_closed,
            m_closed_form: m_closed,
            check,
        })
    }

    /// The (ρ1) constant over a distance s >= 0, with L(0) = 1.
    pub fn l_hat(&self, s: f64) -> Result<f64> {
        if s == 0.0 {
            return Ok(1.0);
        }
        Ok(self.constants(s)?.l)
    }

    /// Check (ρ1) and (ρ2) at t = 0 and 10³ log-spaced t in [1e-4, 1e8].
    pub fn verify_constants(&self, eps: f64, l: f64, m: f64) -> GridCheck {
        let grid = verification_grid();
        let mut out = GridCheck {
            points: grid.len(),
            l_sup: 0.0,
            m_sup: 0.0,
            l_violation: None,
            m_violation: None,
            l_tight: false,
            m_tight: false,
        };
        for &t in &grid {
            let base = self.at(t);
            let rl = self.at(eps + t) / base;
            let rm = self.at(t * eps) / base;
            out.l_sup = out.l_sup.max(rl);
            out.m_sup = out.m_sup.max(rm);
            if rl > l * (1.0 + 1e-12) && out.l_violation.is_none() {
                out.l_violation = Some(t);
            }
            if rm > m * (1.0 + 1e-12) && out.m_violation.is_none() {
                out.m_violation = Some(t);
            }
        }
        out.l_tight = out.l_sup >= l / 1.05;
        out.m_tight = out.m_sup >= m / 1.05;
        out
    }
}

impl fmt::Display for ControlFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ControlFunction::Constant => write!(f, "constant"),
            ControlFunction::Affine { c } => write!(f, "affine:{c}"),
            ControlFunction::Power { c, p } => write!(f, "power:{c},{p}"),
            ControlFunction::Log { c } => write!(f, "log:{c}"),
            ControlFunction::Table { knots } => {
                write!(f, "table:")?;
                for (i, (t, v)) in knots.iter().enumerate() {
                    write!(f, "{}{t}={v}", if i == 0 { "" } else { ";" })?;
                }
                Ok(())
            }
        }
    }
}

/// Parses `constant`, `affine:C`, `power:C,p`, `log:C` and
/// `table:t0=v0;t1=v1;...`.
impl FromStr for ControlFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let num = |v: &str| -> Result<f64> {
            v.trim()
                .parse::<f64>()
                .map_err(|_| invalid(format!("bad number `{v}` in control function `{s}`")))
        };
        let (name, args) = s.trim().split_once(':').unwrap_or((s.trim(), ""));
        let rho = match name {
            "constant" if args.is_empty() => ControlFunction::Constant,
            "affine" => ControlFunction::Affine { c: num(args)? },
            "log" => ControlFunction::Log { c: num(args)? },
            "power" => {
                let (c, p) = args
                    .split_once(',')
                    .ok_or_else(|| invalid(format!("power needs `power:C,p`, got `{s}`")))?;
                ControlFunction::Power { c: num(c)?, p: num(p)? }
            }
            "table" => ControlFunction::Table {
                knots: args
                    .split(';')
                    .map(|kv| {
                        let (t, v) = kv
                            .split_once('=')
                            .ok_or_else(|| invalid(format!("table knot `{kv}` is not t=v")))?;
                        Ok((num(t)?, num(v)?))
                    })
                    .collect::<Result<_>>()?,
            },
            _ => {
                return Err(invalid(format!(
                    "unknown control function `{s}`; expected constant, affine:C, power:C,p, log:C or table:t=v;..."
                )))
            }
        };
        rho.validate()?;
        Ok(rho)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlConstants {
    pub eps: f64,
    pub l: f64,
    pub m: f64,
    pub l_closed_form: bool,
    pub m_closed_form: bool,
    pub check: GridCheck,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridCheck {
    pub points: usize,
    pub l_sup: f64,
    pub m_sup: f64,
    /// First t where (ρ1) fails, if any.
    pub l_violation: Option<f64>,
    pub m_violation: Option<f64>,
    /// The grid supremum is within 5% of the constant.
    pub l_tight: bool,
    pub m_tight: bool,
}

pub fn verification_grid() -> Vec<f64> {
    let n = 1000;
    let (lo, hi) = (1e-4f64.ln(), 1e8f64.ln());
    std::iter::once(0.0)
        .chain((0..n).map(|i| (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp()))
        .collect()
}

/// sup over t >= 0 of g: a dense log grid on [1e-8, 1e14] plus t = 0,
/// then golden-section refinement around the best grid point.
fn numeric_sup(g: impl Fn(f64) -> f64) -> f64 {
    let n = 20_000;
    let (lo, hi) = (1e-8f64.ln(), 1e14f64.ln());
    let ts: Vec<f64> = std::iter::once(0.0)
        .chain((0..n).map(|i| (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp()))
        .collect();
    let (best_i, mut best) = ts
        .iter()
        .map(|&t| g(t))
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |a, (i, v)| if v > a.1 { (i, v) } else { a });
    let (mut a, mut b) = (ts[best_i.saturating_sub(1)], ts[(best_i + 1).min(ts.len() - 1)]);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..200 {
        let c = b - phi * (b - a);
        let d = a + phi * (b - a);
        let (gc, gd) = (g(c), g(d));
        best = best.max(gc).max(gd);
        if gc > gd {
            b = d;
        } else {
            a = c;
        }
    }
    // a hair of slack for rounding in the ratio
    best * (1.0 + 1e-12)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GrowthModel {
    Constant,
    Log,
    Affine,
    Power,
}

impl GrowthModel {
    /// Control function class that suffices for a K*(R) table of this
    /// shape.
    pub fn describe(self) -> &'static str {
        match self {
            GrowthModel::Constant => "constant-sufficient",
            GrowthModel::Log => "log-needed",
            GrowthModel::Affine => "affine-needed",
            GrowthModel::Power => "power-needed",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelFit {
    pub model: GrowthModel,
    /// K ≈ a + b·f(R): constant [a]; log [a, b]; affine [a, b];
    /// power [a, b, p] with f(R) = R^p.
    pub params: Vec<f64>,
    pub rss: f64,
    /// RMS residual divided by the mean |K|.
    pub relative_rms: f64,
    pub r_squared: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    pub model: GrowthModel,
    pub label: String,
    pub r_squared: f64,
    pub tolerance: f64,
    pub fits: Vec<ModelFit>,
}

impl GrowthFit {
    pub fn chosen(&self) -> &ModelFit {
        self.fits
            .iter()
            .find(|f| f.model == self.model)
            .expect("chosen model was fitted")
    }
}

pub const DEFAULT_GROWTH_TOLERANCE: f64 = 0.02;

/// Fit constant, log, affine and power models to (R, K) and pick the
/// simplest one whose relative RMS residual is within `tolerance`, or the
/// best fit if none is.
pub fn classify_growth(samples: &[(f64, f64)], tolerance: f64) -> Result<GrowthFit> {
    if samples.len() < 5 {
        return Err(invalid(format!(
            "growth classification needs at least 5 samples, got {}",
            samples.len()
        )));
    }
    if samples
        .iter()
        .any(|&(r, k)| !(r > 0.0) || !r.is_finite() || !k.is_finite())
    {
        return Err(invalid("growth samples need positive R and finite K"));
    }
    if samples.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(invalid("growth samples must have increasing R"));
    }
    let ks: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let n = ks.len() as f64;
    let mean = ks.iter().sum::<f64>() / n;
    let tss: f64 = ks.iter().map(|k| (k - mean).powi(2)).sum();
    let scale = ks.iter().map(|k| k.abs()).sum::<f64>() / n;
    let finish = |model, params: Vec<f64>, rss: f64| ModelFit {
        model,
        params,
        rss,
        relative_rms: if scale > 0.0 { (rss / n).sqrt() / scale } else { 0.0 },
        r_squared: if tss > 0.0 {
            1.0 - rss / tss
        } else if rss <= 0.0 {
            1.0
        } else {
            0.0
        },
    };
    let line = |f: &dyn Fn(f64) -> f64| -> (f64, f64, f64) {
        let xs: Vec<f64> = samples.iter().map(|s| f(s.0)).collect();
        let mx = xs.iter().sum::<f64>() / n;
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        let sxy: f64 = xs.iter().zip(&ks).map(|(x, k)| (x - mx) * (k - mean)).sum();
        let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
        let a = mean - b * mx;
        let rss = xs.iter().zip(&ks).map(|(x, k)| (k - a - b * x).powi(2)).sum();
        (a, b, rss)
    };

    let mut fits = vec![finish(GrowthModel::Constant, vec![mean], tss)];
    let (a, b, rss) = line(&f64::ln);
    fits.push(finish(GrowthModel::Log, vec![a, b], rss));
    let (a, b, rss) = line(&|r| r);
    fits.push(finish(GrowthModel::Affine, vec![a, b], rss));
    let power = (10..=400)
        .map(|i| {
            let p = i as f64 / 100.0;
            let (a, b, rss) = line(&|r| r.powf(p));
            (a, b, p, rss)
        })
        .fold(None::<(f64, f64, f64, f64)>, |best, c| match best {
            Some(b) if b.3 <= c.3 => Some(b),
            _ => Some(c),
        })
        .expect("nonempty exponent grid");
    fits.push(finish(GrowthModel::Power, vec![power.0, power.1, power.2], power.3));

    let chosen = fits
        .iter()
        .find(|f| f.relative_rms <= tolerance)
        .or_else(|| fits.iter().min_by(|a, b| a.rss.total_cmp(&b.rss)))
        .expect("four fits");
    Ok(GrowthFit {
        model: chosen.model,
        label: chosen.model.describe().to_string(),
        r_squared: chosen.r_squared,
        tolerance,
        fits,
    })
}
