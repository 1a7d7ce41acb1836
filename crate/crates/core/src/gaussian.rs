//! Standard normal distribution: CDF, quantile and large-deviation tail
//! approximations.
//!
//! The CDF follows W. J. Cody's rational Chebyshev approximations. The lower
//! tail is evaluated directly as a complementary quantity (never as `1 - Φ`)
//! and `exp(-x²/2)` is split into two factors so that the result keeps full
//! relative precision down to about `1e-300`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_677_94;
const SQRT_2PI: f64 = 2.506_628_274_631_000_502_4;
/// `ln(sqrt(2π))`
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_741_78;
const SQRT_32: f64 = 5.656_854_249_492_380_195_2;

/// Beyond this magnitude Φ underflows (lower tail) or rounds to one.
const CDF_CUTOFF: f64 = 37.5193;

/// Maximum number of Halley refinement steps applied to the initial quantile.
const MAX_POLISH_STEPS: usize = 3;

/// A probability strictly inside `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Probability(f64);

impl Probability {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value > 0.0 && value < 1.0 {
            Ok(Probability(value))
        } else {
            Err(Error::Domain(format!(
                "probability must lie in the open interval (0, 1), got {value}"
            )))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// `1 - p`. Exact when `p >= 0.5`.
    pub fn complement(self) -> Probability {
        Probability(1.0 - self.0)
    }
}

impl TryFrom<f64> for Probability {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Probability::new(value)
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

/// Standard normal density.
#[inline]
pub fn normal_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Returns `(Φ(x), 1 - Φ(x))`, each computed with full relative precision
/// in its own tail.
fn cdf_pair(x: f64) -> (f64, f64) {
    const A: [f64; 5] = [
        2.235_252_035_460_683_928_7,
        161.028_231_068_555_878_81,
        1_067.689_485_460_370_958_2,
        18_154.981_253_343_561_249,
        0.065_682_337_918_207_449_113,
    ];
    const B: [f64; 4] = [
        47.202_581_904_688_241_87,
        976.098_551_737_776_693_22,
        10_260.932_208_618_978_205,
        45_507.789_335_026_729_956,
    ];
    const C: [f64; 9] = [
        0.398_941_512_088_134_667_64,
        8.883_149_794_388_375_941_2,
        93.506_656_132_177_855_979,
        597.270_276_394_800_262_26,
        2_494.537_585_290_372_671_1,
        6_848.190_450_536_282_332_6,
        11_602.651_437_647_350_124,
        9_842.714_838_383_978_021_8,
        1.076_557_677_372_019_231_7e-8,
    ];
    const D: [f64; 8] = [
        22.266_688_044_328_115_691,
        235.387_901_782_624_998_61,
        1_519.377_599_407_554_805,
        6_485.558_298_266_760_755,
        18_615.571_640_885_098_091,
        34_900.952_721_145_977_266,
        38_912.003_286_093_271_411,
        19_685.429_676_859_990_727,
    ];
    const P: [f64; 6] = [
        0.215_898_534_057_956_99,
        0.127_401_161_160_247_363_9,
        0.022_235_277_870_649_807,
        0.001_421_619_193_227_893_466,
        2.911_287_495_116_879_2e-5,
        0.023_073_441_764_940_173_03,
    ];
    const Q: [f64; 5] = [
        1.284_260_096_144_911_21,
        0.468_238_212_480_865_118,
        0.065_988_137_868_928_551_5,
        0.003_782_396_332_027_582_44,
        7.297_515_550_839_662_05e-5,
    ];

    let y = x.abs();
    if y <= 0.674_489_75 {
        let (xnum, xden) = if y > f64::EPSILON * 0.5 {
            let xsq = x * x;
            let mut xnum = A[4] * xsq;
            let mut xden = xsq;
            for i in 0..3 {
                xnum = (xnum + A[i]) * xsq;
                xden = (xden + B[i]) * xsq;
            }
            (xnum, xden)
        } else {
            (0.0, 0.0)
        };
        let temp = x * (xnum + A[3]) / (xden + B[3]);
        return (0.5 + temp, 0.5 - temp);
    }

    // Lower-tail mass at -|x|, scaled by exp(-x²/2) split as exp(-xsq²/2)·exp(-del/2).
    let lower = if y <= SQRT_32 {
        let mut xnum = C[8] * y;
        let mut xden = y;
        for i in 0..7 {
            xnum = (xnum + C[i]) * y;
            xden = (xden + D[i]) * y;
        }
        let temp = (xnum + C[7]) / (xden + D[7]);
        split_gaussian_factor(y) * temp
    } else if y < CDF_CUTOFF {
        let xsq = 1.0 / (x * x);
        let mut xnum = P[5] * xsq;
        let mut xden = xsq;
        for i in 0..4 {
            xnum = (xnum + P[i]) * xsq;
            xden = (xden + Q[i]) * xsq;
        }
        let temp = xsq * (xnum + P[4]) / (xden + Q[4]);
        let temp = (FRAC_1_SQRT_2PI - temp) / y;
        split_gaussian_factor(y) * temp
    } else {
        0.0
    };

    if x > 0.0 {
        (1.0 - lower, lower)
    } else {
        (lower, 1.0 - lower)
    }
}

/// `exp(-y²/2)` evaluated without losing relative precision for large `y`.
#[inline]
fn split_gaussian_factor(y: f64) -> f64 {
    let ysq = (y * 16.0).trunc() / 16.0;
    let del = (y - ysq) * (y + ysq);
    (-ysq * ysq * 0.5).exp() * (-del * 0.5).exp()
}

/// Standard normal CDF Φ(x).
///
/// For `x <= 0` the value is the directly computed lower tail (relative
/// error around 1e-15); for `x > 0` it is `1 - Φ(-x)`.
pub fn normal_cdf(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("normal_cdf requires a finite argument, got {x}")));
    }
    Ok(cdf_pair(x).0)
}

/// Upper tail `1 - Φ(x)`, accurate in relative terms for large positive `x`.
pub fn normal_sf(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("normal_sf requires a finite argument, got {x}")));
    }
    Ok(cdf_pair(x).1)
}

/// Acklam's rational approximation for the lower half `p <= 0.5`.
/// Relative error about 1.15e-9 before refinement.
fn initial_lower_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_690e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.024_25;

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}

/// Lower-half quantile refined by Halley steps against the lower-tail CDF.
fn lower_quantile(p: f64) -> f64 {
    let mut x = initial_lower_quantile(p);
    for _ in 0..MAX_POLISH_STEPS {
        let cdf = cdf_pair(x).0;
        if cdf == 0.0 {
            // Underflowed tail; the rational start is all we have.
            break;
        }
        let err = cdf - p;
        let u = err * SQRT_2PI * (0.5 * x * x).exp();
        let step = u / (1.0 + 0.5 * x * u);
        x -= step;
        if step.abs() <= 1e-15 * x.abs().max(1.0) {
            break;
        }
    }
    x
}

/// Standard normal quantile Φ⁻¹(p).
pub fn normal_quantile(p: Probability) -> f64 {
    let p = p.value();
    if p <= 0.5 {
        lower_quantile(p)
    } else {
        -lower_quantile(1.0 - p)
    }
}

/// `z_{1-α}`, the upper α quantile, evaluated on the tail mass directly.
pub fn upper_quantile(alpha: Probability) -> f64 {
    let a = alpha.value();
    if a <= 0.5 {
        -lower_quantile(a)
    } else {
        lower_quantile(1.0 - a)
    }
}

/// Closed-form large-quantile representation
/// `sqrt(-2 ln α - ln|ln α| - ln(4π))`, returned without any correction
/// factor.
pub fn large_quantile_approx(alpha: Probability) -> Result<f64> {
    let ln_a = alpha.value().ln();
    let radicand = -2.0 * ln_a - ln_a.abs().ln() - (4.0 * PI).ln();
    if radicand > 0.0 {
        Ok(radicand.sqrt())
    } else {
        Err(Error::Regime(format!(
            "alpha = {} is not in the asymptotic regime of the large-quantile representation \
             (radicand -2 ln a - ln|ln a| - ln 4pi = {radicand} <= 0)",
            alpha.value()
        )))
    }
}

/// Logarithm of the leading Mills-ratio tail term `e^{-x²/2} / (sqrt(2π) x)`.
pub fn ln_mills_tail(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("mills_tail requires x > 0, got {x}")));
    }
    Ok(-0.5 * x * x - x.ln() - LN_SQRT_2PI)
}

/// Leading tail term `e^{-x²/2} / (sqrt(2π) x)`, evaluated through its
/// logarithm. Underflows to zero only beyond `x ≈ 38.5`; use
/// [`ln_mills_tail`] past that.
pub fn mills_tail(x: f64) -> Result<f64> {
    ln_mills_tail(x).map(f64::exp)
}
