//! Globally adaptive Gauss–Kronrod (G10/K21) quadrature over finite
//! intervals with user-supplied breakpoints. Integrands may be real or complex.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Positive nodes and weights of the 8-point Gauss–Legendre rule on [-1, 1].
pub(crate) const GL8_NODES: [f64; 4] = [
    0.183_434_642_495_649_804_939_476_142_360_184,
    0.525_532_409_916_328_985_817_739_049_189_246,
    0.796_666_477_413_626_739_591_553_936_475_831,
    0.960_289_856_497_536_231_683_560_868_569_473,
];
pub(crate) const GL8_WEIGHTS: [f64; 4] = [
    0.362_683_783_378_361_982_965_150_449_277_196,
    0.313_706_645_877_887_287_337_962_201_986_601,
    0.222_381_034_453_374_470_544_355_994_426_241,
    0.101_228_536_290_376_259_152_531_354_309_962,
];

/// Values that can be integrated: real or complex scalars.
pub trait QuadValue:
    Copy + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn magnitude(self) -> f64;
}

impl QuadValue for f64 {
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Estimate<T> {
    pub value: T,
    pub error: f64,
    pub intervals: usize,
}

/// Tolerances for [`Quadrature::integrate`]. Convergence requires the summed
/// error estimate to fall below `max(abs_tol, rel_tol * |I|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self { abs_tol: 1e-12, rel_tol: 1e-10, max_intervals: 5000 }
    }
}

struct Segment<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
}

impl<T> PartialEq for Segment<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl<T> Eq for Segment<T> {}
impl<T> PartialOrd for Segment<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Segment<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// One 21-point Kronrod sweep with the QUADPACK error heuristic.
fn kronrod21<T: QuadValue, F: Fn(f64) -> T>(f: &F, a: f64, b: f64) -> (T, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);

    let mut fv1 = [T::default(); 10];
    let mut fv2 = [T::default(); 10];
    let mut res_k = f_center * WGK[10];
    let mut res_g = T::default();
    let mut res_abs = f_center.magnitude() * WGK[10];

    for j in 0..5 {
        let jtw = 2 * j + 1;
        let dx = half * XGK[jtw];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[jtw] = f1;
        fv2[jtw] = f2;
        res_g = res_g + (f1 + f2) * WG[j];
        res_k = res_k + (f1 + f2) * WGK[jtw];
        res_abs += WGK[jtw] * (f1.magnitude() + f2.magnitude());
    }
    for j in 0..5 {
        let jtwm1 = 2 * j;
        let dx = half * XGK[jtwm1];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[jtwm1] = f1;
        fv2[jtwm1] = f2;
        res_k = res_k + (f1 + f2) * WGK[jtwm1];
        res_abs += WGK[jtwm1] * (f1.magnitude() + f2.magnitude());
    }

    let mean = res_k * 0.5;
    let mut res_asc = WGK[10] * (f_center - mean).magnitude();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).magnitude() + (fv2[j] - mean).magnitude());
    }

    let scale = half.abs();
    let raw_err = (res_k - res_g).magnitude() * scale;
    let res_abs = res_abs * scale;
    let res_asc = res_asc * scale;

    let mut err = raw_err;
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (res_k * half, err)
}

impl Quadrature {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        Self { abs_tol, rel_tol, ..Self::default() }
    }

    /// Integrates `f` over `[points[0], points[last]]`, using every entry of
    /// `points` (which must be non-decreasing) as an initial breakpoint.
    pub fn integrate<T, F>(&self, f: F, points: &[f64]) -> Result<Estimate<T>>
    where
        T: QuadValue,
        F: Fn(f64) -> T,
    {
        if points.len() < 2 {
            return Err(Error::Argument("quadrature needs at least two points".into()));
        }
        let mut heap = BinaryHeap::new();
        let mut frozen_value = T::default();
        let mut frozen_error = 0.0;
        for w in points.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b < a || !a.is_finite() || !b.is_finite() {
                return Err(Error::Argument(format!("bad quadrature interval [{a}, {b}]")));
            }
            if b == a {
                continue;
            }
            let (value, error) = kronrod21(&f, a, b);
            heap.push(Segment { a, b, value, error });
        }

        let mut total = heap.iter().fold(T::default(), |acc, s| acc + s.value);
        let mut err: f64 = heap.iter().map(|s| s.error).sum();
        loop {
            let target = self.abs_tol.max(self.rel_tol * total.magnitude());
            if err <= target || heap.is_empty() || heap.len() >= self.max_intervals {
                // Re-sum to shed the drift of the running totals.
                let value = heap.iter().fold(frozen_value, |acc, s| acc + s.value);
                let error = frozen_error + heap.iter().map(|s| s.error).sum::<f64>();
                let target = self.abs_tol.max(self.rel_tol * value.magnitude());
                if heap.len() >= self.max_intervals && (!error.is_finite() || error > 100.0 * target) {
                    return Err(Error::NonConvergence { what: "adaptive quadrature", estimate: error });
                }
                return Ok(Estimate { value, error, intervals: heap.len() });
            }
            let Some(worst) = heap.pop() else { unreachable!() };
            let mid = 0.5 * (worst.a + worst.b);
            if mid <= worst.a || mid >= worst.b || (worst.b - worst.a) < 1e-14 * worst.a.abs().max(1e-300) {
                // Interval cannot be split further in floating point.
                frozen_value = frozen_value + worst.value;
                frozen_error += worst.error;
                continue;
            }
            let (v1, e1) = kronrod21(&f, worst.a, mid);
            let (v2, e2) = kronrod21(&f, mid, worst.b);
            total = total + v1 + v2 - worst.value;
            err += e1 + e2 - worst.error;
            heap.push(Segment { a: worst.a, b: mid, value: v1, error: e1 });
            heap.push(Segment { a: mid, b: worst.b, value: v2, error: e2 });
        }
    }
}
