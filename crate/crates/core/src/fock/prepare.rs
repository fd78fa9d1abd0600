use serde::{Deserialize, Serialize};

use super::cutoff::CutoffSpec;
use super::gates::ln_factorials;
use super::state::FockState;
use crate::{Error, Result, C64};

/// Leaked probability above which a preparation carries a warning.
pub const LEAK_WARN: f64 = 1e-6;
/// Leaked probability above which a preparation is refused.
pub const LEAK_ERROR: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PrepKind {
    Vacuum,
    Coherent { alpha: C64 },
    Squeezed { z: C64 },
    /// `BS(pi/4, pi) (S(r) x S(-r)) |0,0> = sum_n (-tanh r)^n / cosh r |n,n>`.
    Tmss { r: f64 },
}

impl PrepKind {
    pub fn modes(&self) -> Option<usize> {
        match self {
            PrepKind::Vacuum => None,
            PrepKind::Coherent { .. } | PrepKind::Squeezed { .. } => Some(1),
            PrepKind::Tmss { .. } => Some(2),
        }
    }
}

/// A renormalised preparation and the probability lost to truncation.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub state: FockState,
    pub leak: f64,
    pub warning: bool,
}

/// Truncated exact amplitudes, without renormalisation.
pub fn prepare_raw(kind: &PrepKind, cutoff: &CutoffSpec) -> Result<FockState> {
    if let Some(m) = kind.modes() {
        if cutoff.modes() != m {
            return Err(Error::shape(format!("{kind:?} needs {m} modes, cutoff has {}", cutoff.modes())));
        }
    }
    let mut amps = vec![C64::new(0.0, 0.0); cutoff.dim()];
    match *kind {
        PrepKind::Vacuum => amps[0] = C64::new(1.0, 0.0),
        PrepKind::Coherent { alpha } => {
            check_finite(alpha)?;
            let n_max = cutoff.max(0);
            if alpha.norm_sqr() == 0.0 {
                amps[0] = C64::new(1.0, 0.0);
            } else {
                let lf = ln_factorials(n_max);
                let (ln_abs, arg) = (alpha.norm().ln(), alpha.arg());
                for (n, a) in amps.iter_mut().enumerate() {
                    let ln_mag = -0.5 * alpha.norm_sqr() + n as f64 * ln_abs - 0.5 * lf[n];
                    *a = C64::from_polar(ln_mag.exp(), n as f64 * arg);
                }
            }
        }
        PrepKind::Squeezed { z } => {
            check_finite(z)?;
            let (r, theta) = (z.norm(), z.arg());
            let ratio = -C64::from_polar(r.tanh(), theta);
            let mut a = C64::new(1.0 / r.cosh().sqrt(), 0.0);
            amps[0] = a;
            for m in (2..=cutoff.max(0)).step_by(2) {
                a *= ratio * ((m - 1) as f64 / m as f64).sqrt();
                amps[m] = a;
            }
        }
        PrepKind::Tmss { r } => {
            if !r.is_finite() {
                return Err(Error::invalid("non-finite squeezing"));
            }
            let nj = cutoff.max(1);
            let t = -r.tanh();
            let mut a = 1.0 / r.cosh();
            for n in 0..=cutoff.max(0).min(nj) {
                amps[n * (nj + 1) + n] = C64::new(a, 0.0);
                a *= t;
            }
        }
    }
    FockState::new(cutoff.clone(), amps)
}

/// Prepares, renormalises and reports the truncation leak. Leaks above
/// [`LEAK_ERROR`] are refused; leaks above [`LEAK_WARN`] set `warning`.
pub fn prepare(kind: &PrepKind, cutoff: &CutoffSpec) -> Result<Prepared> {
    let raw = prepare_raw(kind, cutoff)?;
    let leak = (1.0 - raw.norm_sq()).max(0.0);
    if leak > LEAK_ERROR {
        return Err(Error::LeakTooLarge { leak, limit: LEAK_ERROR });
    }
    Ok(Prepared { state: raw.normalized()?, leak, warning: leak > LEAK_WARN })
}

fn check_finite(c: C64) -> Result<()> {
    if c.re.is_finite() && c.im.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid("non-finite preparation parameter"))
    }
}
