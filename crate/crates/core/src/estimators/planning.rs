use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::fock::FockState;
use crate::{Error, Result};

/// Smallest mean photon number accepted by the normal-quantile planner.
pub const NORMAL_MIN_ENERGY: f64 = 25.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanMethod {
    ExactTail,
    SqueezedClosedForm,
    Chernoff,
    /// Relies on the normal approximation to the Poisson tail; not a
    /// certified bound.
    NormalQuantile,
}

/// A detector threshold `2M` and the systematic-error bound it achieves.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffPlan {
    #[serde(rename = "M")]
    pub m: usize,
    pub bound: f64,
    pub method: PlanMethod,
    pub target_eps: f64,
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("eps = {eps} must lie in (0, 1)")))
    }
}

/// `tanh^{2(M+1)} r`.
pub fn squeezed_bound(r: f64, m: usize) -> f64 {
    (2.0 * (m as f64 + 1.0) * r.tanh().ln()).exp()
}

/// Sufficient threshold `e^{2r}/4 ln(1/eps) - 1` for large squeezing.
pub fn squeezed_large_r_cutoff(r: f64, eps: f64) -> f64 {
    (2.0 * r).exp() / 4.0 * (1.0 / eps).ln() - 1.0
}

/// Smallest `M` with `tanh^{2(M+1)} r <= eps`.
pub fn cutoff_for_squeezed(r: f64, eps: f64) -> Result<CutoffPlan> {
    check_eps(eps)?;
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::invalid(format!("squeezing r = {r} must be positive")));
    }
    let start = (eps.ln() / (2.0 * r.tanh().ln())).ceil() - 1.0;
    let mut m = if start > 0.0 { start as usize } else { 0 };
    while squeezed_bound(r, m) > eps {
        m += 1;
    }
    while m > 0 && squeezed_bound(r, m - 1) <= eps {
        m -= 1;
    }
    Ok(CutoffPlan { m, bound: squeezed_bound(r, m), method: PlanMethod::SqueezedClosedForm, target_eps: eps })
}

/// `(eE/M)^{2M} e^{-2E}`, the Chernoff tail bound on `1 - q_2M` for two
/// coherent states of energy `E`. Only meaningful for `M > E`; returns 1
/// otherwise.
pub fn chernoff_bound(e: f64, m: usize) -> f64 {
    let mf = m as f64;
    if mf <= e {
        return 1.0;
    }
    (2.0 * mf * (1.0 + e.ln() - mf.ln()) - 2.0 * e).exp()
}

/// `ceil(1.3 E + ln(1/eps))`.
pub fn chernoff_candidate(e: f64, eps: f64) -> usize {
    (1.3 * e + (1.0 / eps).ln()).ceil() as usize
}

pub fn cutoff_for_coherent_chernoff(e: f64, eps: f64) -> Result<CutoffPlan> {
    check_eps(eps)?;
    if !(e > 0.0 && e.is_finite()) {
        return Err(Error::invalid(format!("energy E = {e} must be positive")));
    }
    let mut m = chernoff_candidate(e, eps);
    while chernoff_bound(e, m) > eps {
        m += 1;
    }
    Ok(CutoffPlan { m, bound: chernoff_bound(e, m), method: PlanMethod::Chernoff, target_eps: eps })
}

/// `M = ceil(E + sqrt(E) probit(sqrt(1 - eps)))` from the normal
/// approximation of the local photon-number CDFs.
pub fn cutoff_for_coherent_normal(e: f64, eps: f64) -> Result<CutoffPlan> {
    check_eps(eps)?;
    if !(e >= NORMAL_MIN_ENERGY && e.is_finite()) {
        return Err(Error::invalid(format!(
            "normal-quantile planning needs E >= {NORMAL_MIN_ENERGY} (got {e}); use the Chernoff planner instead"
        )));
    }
    let target = e + e.sqrt() * probit((1.0 - eps).sqrt());
    let m = target.ceil().max(0.0) as usize;
    let bound = 1.0 - normal_cdf((m as f64 - e) / e.sqrt()).powi(2);
    Ok(CutoffPlan { m, bound, method: PlanMethod::NormalQuantile, target_eps: eps })
}

/// Smallest `M` whose exact global bound `1 - q_2M` on `joint` is at most
/// `eps`.
pub fn cutoff_exact_tail(joint: &FockState, eps: f64) -> Result<CutoffPlan> {
    check_eps(eps)?;
    if joint.modes() != 2 {
        return Err(Error::shape("exact-tail planning needs a two-mode state"));
    }
    let dist = joint.total_photon_distribution();
    let mut q = 0.0;
    for (t, p) in dist.iter().enumerate() {
        q += p;
        if t % 2 == 1 || t + 1 == dist.len() {
            let bound = (1.0 - q).max(0.0);
            if bound <= eps {
                return Ok(CutoffPlan { m: t / 2, bound, method: PlanMethod::ExactTail, target_eps: eps });
            }
        }
    }
    Err(Error::invalid(format!("no threshold within the state's cutoff reaches eps = {eps}")))
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal quantile by Wichura's AS241 (PPND16), relative accuracy
/// about 1e-16.
pub fn probit(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q * poly(&A, r) / poly(&B, r);
    }
    let r = if q < 0.0 { p } else { 1.0 - p };
    let r = (-r.ln()).sqrt();
    let x = if r <= 5.0 {
        let r = r - 1.6;
        poly(&C, r) / poly(&D, r)
    } else {
        let r = r - 5.0;
        poly(&E, r) / poly(&F, r)
    };
    if q < 0.0 {
        -x
    } else {
        x
    }
}

fn poly(c: &[f64; 8], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &k| acc * x + k)
}

const A: [f64; 8] = [
    3.387_132_872_796_366_608,
    1.331_416_678_917_843_774_5e2,
    1.971_590_950_306_551_442_7e3,
    1.373_169_376_550_946_112_5e4,
    4.592_195_393_154_987_145_7e4,
    6.726_577_092_700_870_085_3e4,
    3.343_057_558_358_812_810_5e4,
    2.509_080_928_730_122_672_7e3,
];
const B: [f64; 8] = [
    1.0,
    4.231_333_070_160_091_125_1e1,
    6.871_870_074_920_579_083e2,
    5.394_196_021_424_751_107_7e3,
    2.121_379_430_158_659_586_7e4,
    3.930_789_580_009_271_061e4,
    2.872_908_573_572_194_267_5e4,
    5.226_495_278_852_545_925_3e3,
];
const C: [f64; 8] = [
    1.423_437_110_749_683_577_34,
    4.630_337_846_156_545_295_9,
    5.769_497_221_460_691_405_5,
    3.647_848_324_763_204_605_04,
    1.270_458_252_452_368_382_58,
    2.417_807_251_774_506_117_7e-1,
    2.272_384_498_926_918_458_33e-2,
    7.745_450_142_783_414_076_4e-4,
];
const D: [f64; 8] = [
    1.0,
    2.053_191_626_637_758_821_87,
    1.676_384_830_183_803_849_4,
    6.897_673_349_851_000_045_5e-1,
    1.481_039_764_274_800_745_58e-1,
    1.519_866_656_361_645_719_66e-2,
    5.475_938_084_995_344_946e-4,
    1.050_750_071_644_416_843_24e-9,
];
const E: [f64; 8] = [
    6.657_904_643_501_103_777_2,
    5.463_784_911_164_114_369_9,
    1.784_826_539_917_291_335_8,
    2.965_605_718_285_048_912_4e-1,
    2.653_218_952_657_612_309_5e-2,
    1.242_660_947_388_078_438_2e-3,
    2.711_555_568_743_487_578_8e-5,
    2.010_334_399_292_288_132_3e-7,
];
const F: [f64; 8] = [
    1.0,
    5.998_322_065_558_879_376_3e-1,
    1.369_298_809_227_358_053_4e-1,
    1.487_536_129_085_061_485_2e-2,
    7.868_691_311_456_132_591e-4,
    1.846_318_317_510_054_681_8e-5,
    1.421_511_758_316_445_887_7e-7,
    2.043_131_982_085_800_917_4e-15,
];
