//! The linearizability frontier: formal linearization series and their
//! radius of convergence, the Cremer germ construction with small divisors,
//! small-cycle search near irrationally indifferent points, the critical
//! value function eta(lambda), and radial Siegel-size scans.

use num_complex::Complex64;

use crate::complex::Cx;
use crate::dynamics::{classify_multiplier, GermSeries, PointClass, RationalMap};
use crate::error::{DynError, Result};
use crate::exact::{ExactSeries, FieldElem};
use crate::linearize::{koenigs_chart_with_cap, koenigs_extend};
use crate::rotation::RotationNumber;

/// Formal power series h(z) = z + h_2 z^2 + ... solving h(lambda z) = f(h(z)),
/// together with the small divisors that produced each coefficient.
#[derive(Clone, Debug)]
pub struct FormalLinearization {
    pub lambda: Complex64,
    /// h_2 .. h_N (index k holds h_{k+2})
    pub coefficients: Vec<Complex64>,
    /// lambda^n - lambda for n = 2..N
    pub divisors: Vec<Complex64>,
    /// the numerators a_n + X_n
    pub numerators: Vec<Complex64>,
}

fn reject_resonant(lambda: Complex64) -> Result<()> {
    match classify_multiplier(lambda) {
        PointClass::Superattracting => Err(DynError::WrongClass(
            "superattracting".into(),
            "the formal linearization needs lambda nonzero".into(),
        )),
        PointClass::RationallyIndifferent { p, q } => Err(DynError::WrongClass(
            format!("rationally indifferent ({p}/{q})"),
            "a root-of-unity multiplier makes a divisor vanish".into(),
        )),
        _ => Ok(()),
    }
}

/// Solve h(lambda z) = f(h(z)) coefficient by coefficient:
/// h_n (lambda^n - lambda) = [z^n] sum_{k>=2} a_k h(z)^k.
pub fn formal_linearization(germ: &GermSeries, n_max: usize) -> Result<FormalLinearization> {
    let lambda = germ.multiplier();
    reject_resonant(lambda)?;
    if n_max < 2 {
        return Err(DynError::Invalid("order must be at least 2".into()));
    }
    let zero = Complex64::new(0.0, 0.0);
    let a = |k: usize| -> Complex64 {
        // f coefficient of z^k (k >= 2)
        germ.coefficients.get(k - 1).copied().unwrap_or(zero)
    };
    // h as a coefficient vector indexed by power (h[1] = 1)
    let mut h = vec![zero; n_max + 1];
    h[1] = Complex64::new(1.0, 0.0);
    // powers of h maintained incrementally: hp[k] = h^k truncated
    let mut coefficients = Vec::with_capacity(n_max - 1);
    let mut divisors = Vec::with_capacity(n_max - 1);
    let mut numerators = Vec::with_capacity(n_max - 1);
    for n in 2..=n_max {
        // numerator T_n = [z^n] sum_{k=2}^{n} a_k h(z)^k, which only uses
        // h_2..h_{n-1}; recompute the needed power coefficients directly
        let mut t = zero;
        let mut h_pow = h.clone(); // h^1
        for k in 2..=n {
            h_pow = poly_mul_trunc(&h_pow, &h, n);
            let ak = a(k);
            if ak != zero {
                t += ak * h_pow[n];
            }
        }
        let div = lambda.powu(n as u32) - lambda;
        h[n] = t / div;
        coefficients.push(h[n]);
        divisors.push(div);
        numerators.push(t);
    }
    Ok(FormalLinearization { lambda, coefficients, divisors, numerators })
}

fn poly_mul_trunc(p: &[Complex64], q: &[Complex64], order: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); order + 1];
    for (i, pi) in p.iter().enumerate().take(order + 1) {
        if pi.norm() == 0.0 {
            continue;
        }
        for (j, qj) in q.iter().enumerate().take(order + 1 - i) {
            out[i + j] += pi * qj;
        }
    }
    out
}

impl FormalLinearization {
    /// Coefficient h_n (n >= 2).
    pub fn coefficient(&self, n: usize) -> Complex64 {
        self.coefficients[n - 2]
    }

    pub fn order(&self) -> usize {
        self.coefficients.len() + 1
    }
}

/// Exact-field counterpart: h coefficients in the number field carrying
/// lambda, with the defining identity holding exactly.
pub fn formal_linearization_exact(
    field: &std::rc::Rc<crate::exact::FieldSpec>,
    germ: &ExactSeries,
    n_max: usize,
) -> Vec<FieldElem> {
    let one = FieldElem::one(field);
    let zero = FieldElem::zero(field);
    let lambda = germ.coeff(1);
    let mut h: Vec<FieldElem> = vec![zero.clone(); n_max + 1];
    h[1] = one;
    let mut out = Vec::with_capacity(n_max - 1);
    for n in 2..=n_max {
        let mut t = zero.clone();
        let mut h_pow = h.clone();
        for k in 2..=n {
            h_pow = exact_mul_trunc(&h_pow, &h, n, &zero);
            let ak = germ.coeff(k);
            if !ak.is_zero() {
                t = t.add(&ak.mul(&h_pow[n]));
            }
        }
        let div = lambda.pow(n as u64).sub(&lambda);
        h[n] = t.div(&div);
        out.push(h[n].clone());
    }
    out
}

fn exact_mul_trunc(
    p: &[FieldElem],
    q: &[FieldElem],
    order: usize,
    zero: &FieldElem,
) -> Vec<FieldElem> {
    let mut out = vec![zero.clone(); order + 1];
    for (i, pi) in p.iter().enumerate().take(order + 1) {
        if pi.is_zero() {
            continue;
        }
        for (j, qj) in q.iter().enumerate().take(order + 1 - i) {
            if !qj.is_zero() {
                out[i + j] = out[i + j].add(&pi.mul(qj));
            }
        }
    }
    out
}

/// Root-test radius estimate from the coefficient tail.
#[derive(Clone, Debug)]
pub struct RadiusEstimate {
    /// 1 / limsup |h_n|^(1/n); f64::INFINITY when all tail coefficients
    /// vanish (the series is a polynomial)
    pub radius: f64,
    /// estimates from the third and fourth quarter of the tail
    pub quarter_estimates: (f64, f64),
    pub low_confidence: bool,
}

pub fn convergence_radius_estimate(lin: &FormalLinearization) -> Result<RadiusEstimate> {
    let n = lin.order();
    if n < 16 {
        return Err(DynError::Invalid(format!(
            "radius estimate needs order >= 16, got {n}"
        )));
    }
    let growth = |from: usize, to: usize| -> f64 {
        let mut sup: f64 = 0.0;
        for m in from..=to {
            let h = lin.coefficient(m).norm();
            if h > 0.0 {
                sup = sup.max(h.powf(1.0 / m as f64));
            }
        }
        sup
    };
    let q3 = growth(n / 2, 3 * n / 4);
    let q4 = growth(3 * n / 4 + 1, n);
    let tail = growth(n / 2, n);
    if tail == 0.0 {
        return Ok(RadiusEstimate {
            radius: f64::INFINITY,
            quarter_estimates: (f64::INFINITY, f64::INFINITY),
            low_confidence: false,
        });
    }
    let r3 = if q3 > 0.0 { 1.0 / q3 } else { f64::INFINITY };
    let r4 = if q4 > 0.0 { 1.0 / q4 } else { f64::INFINITY };
    let low_confidence = if r3.is_finite() && r4.is_finite() {
        (r3 - r4).abs() > 0.5 * r3.max(r4)
    } else {
        true
    };
    Ok(RadiusEstimate { radius: 1.0 / tail, quarter_estimates: (r3, r4), low_confidence })
}

/// The Cremer construction together with the linearization it defeats.
#[derive(Clone, Debug)]
pub struct CremerConstruction {
    pub germ: GermSeries,
    pub linearization: FormalLinearization,
}

/// The Cremer construction (per the small-divisor recursion): choose each
/// higher coefficient a_n in {0, 1} so that |a_n + X_n| >= 1/2, forcing
/// |h_n| >= (1/2)/|lambda^n - lambda|. The linearization coefficients are
/// computed alongside, so near-resonant multipliers (which would be flagged
/// as roots of unity by float classification) are handled directly.
pub fn cremer_germ(xi: &RotationNumber, n_max: usize) -> Result<CremerConstruction> {
    // the recursion divides by lambda^n - lambda, which vanishes exactly when
    // the reduced denominator of a rational angle divides n - 1
    if xi.is_rational() {
        let (lo, hi) = xi.enclosure(64);
        if lo == hi && *lo.denom() < num_bigint::BigInt::from(n_max) {
            return Err(DynError::WrongClass(
                "rational rotation number".into(),
                "a root-of-unity multiplier makes a divisor vanish within the order".into(),
            ));
        }
    }
    let lambda = xi.multiplier();
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let mut a = vec![zero; n_max + 1];
    a[1] = lambda;
    let mut h = vec![zero; n_max + 1];
    h[1] = one;
    let mut coefficients = Vec::with_capacity(n_max - 1);
    let mut divisors = Vec::with_capacity(n_max - 1);
    let mut numerators = Vec::with_capacity(n_max - 1);
    for n in 2..=n_max {
        // X_n = [z^n] sum_{k=2}^{n-1} a_k h^k (a_n itself contributes 1)
        let mut x = zero;
        let mut h_pow = h.clone();
        for k in 2..=n {
            h_pow = poly_mul_trunc(&h_pow, &h, n);
            if k < n && a[k] != zero {
                x += a[k] * h_pow[n];
            }
        }
        // two points at distance 1 cannot both lie inside the open disk of
        // radius 1/2: pick the better of a_n = 0, 1
        let with_zero = x.norm();
        let with_one = (x + one).norm();
        let (an, t) = if with_one >= with_zero { (one, x + one) } else { (zero, x) };
        a[n] = an;
        let div = lambda.powu(n as u32) - lambda;
        h[n] = t / div;
        if !h[n].is_finite() {
            return Err(DynError::Precision { certified: n - 1, requested: n_max });
        }
        debug_assert!(t.norm() >= 0.5 - 1e-12);
        coefficients.push(h[n]);
        divisors.push(div);
        numerators.push(t);
    }
    Ok(CremerConstruction {
        germ: GermSeries { coefficients: a[1..].to_vec(), order: n_max },
        linearization: FormalLinearization { lambda, coefficients, divisors, numerators },
    })
}

/// One short cycle found near an indifferent fixed point.
#[derive(Clone, Debug)]
pub struct SmallCycle {
    pub q: usize,
    pub points: Vec<Complex64>,
    pub multiplier: Complex64,
}

#[derive(Clone, Debug)]
pub struct SmallCycleReport {
    pub cycles: Vec<SmallCycle>,
    /// q at which the iterate degree cap stopped the search, if any
    pub capped_at: Option<usize>,
    /// (q, relative error of prod nonzero fixed points = +-(lambda^q - 1))
    pub product_checks: Vec<(usize, f64)>,
    /// (q, smallest nonzero |root|, bound |lambda^q - 1|^(1/d^q))
    pub bound_witnesses: Vec<(usize, f64, f64)>,
}

/// Search for cycles of period <= q_max lying entirely inside |z| < delta.
/// The fixed point must be at the origin.
pub fn small_cycle_search(
    map: &RationalMap,
    lambda: Complex64,
    q_max: usize,
    delta: f64,
) -> Result<SmallCycleReport> {
    match map.eval(Cx::Finite(Complex64::new(0.0, 0.0))) {
        Cx::Finite(v) if v.norm() < 1e-12 => {}
        _ => {
            return Err(DynError::BadMap(
                "small-cycle search expects the fixed point normalized to the origin".into(),
            ))
        }
    }
    let d = map.degree();
    let mut report = SmallCycleReport {
        cycles: Vec::new(),
        capped_at: None,
        product_checks: Vec::new(),
        bound_witnesses: Vec::new(),
    };
    for q in 1..=q_max {
        let iterate = match map.iterate_map(q) {
            Ok(m) => m,
            Err(DynError::DegreeCap { .. }) => {
                report.capped_at = Some(q);
                break;
            }
            Err(e) => return Err(e),
        };
        // fixed points of f^q: roots of P_q(z) - z Q_q(z)
        let fixed_poly = iterate
            .numerator()
            .sub(&crate::poly::Polynomial::z().mul(iterate.denominator()));
        // product of the nonzero fixed points, read off the coefficients:
        // p(z) = z (c_1 + ... + c_m z^(m-1)) gives (-1)^(m-1) c_1 / c_m
        let target = lambda.powu(q as u32) - 1.0;
        let coeffs = fixed_poly.coeffs();
        let m = fixed_poly.degree();
        if m >= 1 && coeffs[0].norm() < 1e-12 && target.norm() > 1e-14 {
            let mut product = coeffs[1] / fixed_poly.leading();
            if (m - 1) % 2 == 1 {
                product = -product;
            }
            let err = ((product - target).norm().min((product + target).norm())) / target.norm();
            report.product_checks.push((q, err));
        }
        let deriv_poly = fixed_poly.derivative();
        let mut roots = match fixed_poly.roots() {
            Ok(r) => r,
            Err(DynError::RootFinder { .. }) => {
                // the iterate's fixed-point polynomial got too ill-conditioned
                report.capped_at = Some(q);
                break;
            }
            Err(e) => return Err(e),
        };
        // Newton-polish simple roots so the product identity check is sharp
        for r in &mut roots {
            if r.multiplicity != 1 {
                continue;
            }
            for _ in 0..3 {
                let dp = deriv_poly.eval(r.value);
                if dp.norm() == 0.0 {
                    break;
                }
                let step = fixed_poly.eval(r.value) / dp;
                if !step.is_finite() || step.norm() > 0.5 * r.value.norm().max(1e-3) {
                    break;
                }
                r.value -= step;
            }
        }
        let mut min_mod = f64::INFINITY;
        for r in &roots {
            if r.value.norm() > 1e-9 {
                min_mod = min_mod.min(r.value.norm());
            }
        }
        if target.norm() < 1.0 && min_mod.is_finite() {
            let bound = target.norm().powf(1.0 / d.pow(q as u32) as f64);
            report.bound_witnesses.push((q, min_mod, bound));
        }
        // collect cycles entirely inside the delta-disk
        let mut seen: Vec<Complex64> = Vec::new();
        'root: for r in &roots {
            let z = r.value;
            if z.norm() < 1e-9 || z.norm() >= delta {
                continue;
            }
            for s in &seen {
                if (z - s).norm() < 1e-9 {
                    continue 'root;
                }
            }
            // trace the orbit and determine the exact period
            let mut orbit = vec![z];
            let mut cur = z;
            let mut inside = true;
            for _ in 1..q {
                cur = match map.eval(Cx::Finite(cur)) {
                    Cx::Finite(v) => v,
                    Cx::Inf => {
                        inside = false;
                        break;
                    }
                };
                if cur.norm() >= delta {
                    inside = false;
                    break;
                }
                orbit.push(cur);
            }
            if !inside {
                continue;
            }
            let closes = match map.eval(Cx::Finite(*orbit.last().unwrap())) {
                Cx::Finite(v) => (v - z).norm() < 1e-6 * delta.max(z.norm()),
                Cx::Inf => false,
            };
            if !closes {
                continue;
            }
            // exact period: smallest divisor p of q with f^p(z) = z
            let mut period = q;
            'div: for p in 1..q {
                if q % p != 0 {
                    continue;
                }
                let mut w = z;
                for _ in 0..p {
                    w = match map.eval(Cx::Finite(w)) {
                        Cx::Finite(v) => v,
                        Cx::Inf => continue 'div,
                    };
                }
                if (w - z).norm() < 1e-9 {
                    period = p;
                    break;
                }
            }
            if period != q {
                continue; // already reported at its exact period
            }
            let mut mult = Complex64::new(1.0, 0.0);
            for p in &orbit {
                mult *= map.deriv(*p);
            }
            seen.extend(orbit.iter().cloned());
            report.cycles.push(SmallCycle { q, points: orbit, multiplier: mult });
        }
    }
    Ok(report)
}

/// Iteration cap for the Koenigs limit in eta: |lambda| near 1 needs many
/// steps before the orbit enters the local disk.
const ETA_CAP: usize = 5_000_000;

/// eta(lambda) = phi_lambda(-lambda/2): the Koenigs image of the critical
/// point of z^2 + lambda z. Bounded by 2 on the punctured disk.
pub fn eta(lambda: Complex64) -> Result<Complex64> {
    let m = lambda.norm();
    if !(m > 0.0 && m < 1.0) {
        return Err(DynError::Domain(format!(
            "eta needs 0 < |lambda| < 1, got |lambda| = {m}"
        )));
    }
    let map = RationalMap::quadratic_lambda(lambda);
    let record = map.classify_fixed_point(Cx::Finite(Complex64::new(0.0, 0.0)))?;
    let chart = koenigs_chart_with_cap(&map, &record, ETA_CAP)?;
    koenigs_extend(&chart, -lambda / 2.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScanVerdict {
    SiegelEvidence,
    CremerEvidence,
    Inconclusive,
}

impl std::fmt::Display for ScanVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ScanVerdict::SiegelEvidence => write!(f, "siegel-evidence"),
            ScanVerdict::CremerEvidence => write!(f, "cremer-evidence"),
            ScanVerdict::Inconclusive => write!(f, "inconclusive"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SiegelSizeEstimate {
    pub xi: f64,
    /// (r_k, |eta(r_k e^{2 pi i xi})|)
    pub samples: Vec<(f64, f64)>,
    /// lim-sup estimate of the Siegel size from the tail samples
    pub rho: f64,
    pub verdict: ScanVerdict,
    /// Cauchy-Riemann residual of eta on a small grid (holomorphy check)
    pub cr_residual: f64,
}

/// Default radial schedule r_k = 1 - 2^(-k), k = 1..=14.
pub fn default_radial_schedule() -> Vec<f64> {
    (1..=14).map(|k| 1.0 - 0.5f64.powi(k)).collect()
}

/// Decision floor for the radial verdict.
pub const SCAN_FLOOR: f64 = 1e-3;

/// Sample |eta| along a radial approach to e^{2 pi i xi}.
pub fn radial_scan(xi: &RotationNumber, radii: &[f64]) -> Result<SiegelSizeEstimate> {
    if radii.is_empty() || radii.windows(2).any(|w| w[1] <= w[0]) || radii.iter().any(|&r| r >= 1.0)
    {
        return Err(DynError::Invalid(
            "radial schedule must increase strictly toward 1".into(),
        ));
    }
    let angle = 2.0 * std::f64::consts::PI * xi.to_f64();
    let dir = Complex64::from_polar(1.0, angle);
    let mut samples = Vec::with_capacity(radii.len());
    for &r in radii {
        let value = eta(r * dir)?;
        samples.push((r, value.norm()));
    }
    // holomorphy sanity: central-difference Cauchy-Riemann residual at a
    // moderate interior sample
    let base = 0.75 * dir;
    let h = 1e-5;
    let fx = (eta(base + Complex64::new(h, 0.0))? - eta(base - Complex64::new(h, 0.0))?)
        / Complex64::new(2.0 * h, 0.0);
    let fy = (eta(base + Complex64::new(0.0, h))? - eta(base - Complex64::new(0.0, h))?)
        / Complex64::new(2.0 * h, 0.0);
    let cr_residual = (fx + Complex64::new(0.0, 1.0) * fy).norm() / fx.norm().max(1e-30);

    let tail: Vec<f64> = samples.iter().rev().take(4).map(|s| s.1).rev().collect();
    let rho = tail.iter().cloned().fold(0.0, f64::max);
    let tail_min = tail.iter().cloned().fold(f64::INFINITY, f64::min);
    let decreasing = tail.windows(2).all(|w| w[1] < w[0]);
    let last = *tail.last().unwrap();
    let verdict = if last >= SCAN_FLOOR && (rho - tail_min) <= 0.15 * rho {
        ScanVerdict::SiegelEvidence
    } else if decreasing && last < SCAN_FLOOR {
        ScanVerdict::CremerEvidence
    } else {
        ScanVerdict::Inconclusive
    };
    Ok(SiegelSizeEstimate { xi: xi.to_f64(), samples, rho, verdict, cr_residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::FieldSpec;
    use crate::linearize::max_disk;
    use crate::rotation::{construct_liouville, GapSchedule};
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn golden_multiplier_germ(order: usize) -> GermSeries {
        let xi = RotationNumber::GoldenMean;
        let lambda = xi.multiplier();
        let mut coeffs = vec![Complex64::new(0.0, 0.0); order];
        coeffs[0] = lambda;
        coeffs[1] = Complex64::new(1.0, 0.0);
        GermSeries { coefficients: coeffs, order }
    }

    #[test]
    fn linear_map_has_identity_linearization() {
        let lambda = Complex64::new(0.3, 0.4);
        let germ = GermSeries { coefficients: vec![lambda], order: 8 };
        let lin = formal_linearization(&germ, 20).unwrap();
        assert!(lin.coefficients.iter().all(|c| c.norm() == 0.0));
        let est = convergence_radius_estimate(&lin).unwrap();
        assert!(est.radius.is_infinite());
    }

    #[test]
    fn quadratic_h2_closed_form() {
        // f = lambda z + z^2: matching order 2 gives h2 = 1/(lambda^2-lambda)
        let lambda = Complex64::new(0.3, 0.5);
        let germ = GermSeries {
            coefficients: vec![lambda, Complex64::new(1.0, 0.0)],
            order: 4,
        };
        let lin = formal_linearization(&germ, 8).unwrap();
        let expect = 1.0 / (lambda * lambda - lambda);
        assert!((lin.coefficient(2) - expect).norm() < 1e-14);
    }

    #[test]
    fn recomposition_residual_float() {
        // f(h(z)) - h(lambda z) vanishes through the truncation order
        let lambda = Complex64::from_polar(1.0, 2.6);
        let germ = GermSeries {
            coefficients: vec![lambda, Complex64::new(1.0, 0.0), Complex64::new(-0.3, 0.2)],
            order: 4,
        };
        let n = 16;
        let lin = formal_linearization(&germ, n).unwrap();
        let mut h = vec![Complex64::new(0.0, 0.0); n + 1];
        h[1] = Complex64::new(1.0, 0.0);
        for m in 2..=n {
            h[m] = lin.coefficient(m);
        }
        // f(h(z))
        let mut fh = vec![Complex64::new(0.0, 0.0); n + 1];
        let mut h_pow = h.clone();
        for (k, ak) in germ.coefficients.iter().enumerate() {
            if k > 0 {
                h_pow = poly_mul_trunc(&h_pow, &h, n);
            }
            for i in 0..=n {
                fh[i] += ak * h_pow[i];
            }
        }
        for m in 1..=n {
            let lhs = h[m] * lambda.powu(m as u32);
            assert!((fh[m] - lhs).norm() < 1e-9 * (1.0 + h[m].norm()), "m={m}");
        }
    }

    #[test]
    fn small_divisor_transparency() {
        let germ = golden_multiplier_germ(4);
        let lin = formal_linearization(&germ, 40).unwrap();
        for i in 0..lin.coefficients.len() {
            let lhs = lin.coefficients[i].norm() * lin.divisors[i].norm();
            let rhs = lin.numerators[i].norm();
            assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1e-300), "n={}", i + 2);
        }
    }

    #[test]
    fn rejects_root_of_unity() {
        let lambda = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * 2.0 / 5.0);
        let germ = GermSeries {
            coefficients: vec![lambda, Complex64::new(1.0, 0.0)],
            order: 4,
        };
        assert!(formal_linearization(&germ, 10).is_err());
        assert!(cremer_germ(&RotationNumber::rational(2, 5), 10).is_err());
    }

    #[test]
    fn golden_quadratic_radius_positive_and_stable() {
        let germ = golden_multiplier_germ(4);
        let r32 = convergence_radius_estimate(&formal_linearization(&germ, 32).unwrap()).unwrap();
        let r64 = convergence_radius_estimate(&formal_linearization(&germ, 64).unwrap()).unwrap();
        assert!(r64.radius > 1e-2, "radius {}", r64.radius);
        assert!((r32.radius - r64.radius).abs() < 0.5 * r64.radius);
    }

    #[test]
    fn exact_recomposition_in_quadratic_field() {
        // lambda = (sqrt 5 - 1)/2 in Q(sqrt 5); f = lambda z + z^2; the
        // defining identity holds with exactly zero residual through order 32
        let field = FieldSpec::quadratic(5);
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        let lambda = FieldElem::generator(&field)
            .sub(&FieldElem::from_i64(&field, 1))
            .mul(&FieldElem::from_rational(&field, half));
        let one = FieldElem::one(&field);
        let n = 32;
        let mut f_coeffs = vec![FieldElem::zero(&field); n];
        f_coeffs[0] = lambda.clone();
        f_coeffs[1] = one.clone();
        let germ = ExactSeries::new(&field, f_coeffs);
        let h = formal_linearization_exact(&field, &germ, n);
        // assemble h as an ExactSeries and verify f(h(z)) = h(lambda z)
        let mut coeffs = vec![one.clone()];
        coeffs.extend(h.iter().cloned());
        coeffs.truncate(n);
        let h_series = ExactSeries::new(&field, coeffs);
        let fh = germ.compose(&h_series);
        let h_lz = h_series.scale_argument(&lambda);
        for m in 1..=n {
            let difference = fh.coeff(m).sub(&h_lz.coeff(m));
            assert!(difference.is_zero(), "order {m} residual is nonzero");
        }
    }

    #[test]
    fn cremer_choice_rule_is_total() {
        // |a_n + X_n| >= 1/2 for every step, any multiplier
        let xi = RotationNumber::GoldenMean;
        let lambda = xi.multiplier();
        let built = cremer_germ(&xi, 48).unwrap();
        assert!((built.germ.multiplier() - lambda).norm() < 1e-15);
        for c in &built.germ.coefficients[1..] {
            assert!(c.norm() == 0.0 || (c.norm() - 1.0).abs() < 1e-15);
        }
        for t in &built.linearization.numerators {
            assert!(t.norm() >= 0.5 - 1e-9);
        }
        // the side computation agrees with the general routine
        let lin = formal_linearization(&built.germ, 48).unwrap();
        for (a, b) in lin.coefficients.iter().zip(&built.linearization.coefficients) {
            assert!((a - b).norm() <= 1e-9 * b.norm().max(1.0));
        }
    }

    #[test]
    fn cremer_divisor_spikes() {
        // near-resonant angle: |h_n| >= (1/2)/|lambda^n - lambda| spikes
        let xi = construct_liouville(GapSchedule::Custom(vec![2, 52, 60])).unwrap();
        let lambda = xi.multiplier();
        let lin = cremer_germ(&xi, 16).unwrap().linearization;
        // n - 1 = 4: lambda^4 is extremely close to 1
        let div = (lambda.powu(5) - lambda).norm();
        assert!(div < 1e-12, "divisor {div}");
        assert!(lin.coefficient(5).norm() >= 0.5 / div * (1.0 - 1e-6));
    }

    #[test]
    fn cremer_radius_collapse() {
        let xi = construct_liouville(GapSchedule::Custom(vec![2, 52, 60])).unwrap();
        let r64 =
            convergence_radius_estimate(&cremer_germ(&xi, 64).unwrap().linearization).unwrap();
        assert!(r64.radius < 1e-3, "radius {}", r64.radius);
        let r32 =
            convergence_radius_estimate(&cremer_germ(&xi, 32).unwrap().linearization).unwrap();
        assert!(r64.radius <= r32.radius * (1.0 + 1e-9), "not decreasing: {} -> {}", r32.radius, r64.radius);
        // control: the golden-mean construction stays tame
        let rg = convergence_radius_estimate(
            &cremer_germ(&RotationNumber::GoldenMean, 64).unwrap().linearization,
        )
        .unwrap();
        assert!(rg.radius.is_finite());
    }

    #[test]
    fn small_cycles_near_liouville_angle() {
        // float-truncated near-resonant angle: a nonzero cycle inside 0.05
        let xi = construct_liouville(GapSchedule::Custom(vec![2, 52, 60])).unwrap();
        let lambda = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * xi.to_f64());
        let map = RationalMap::quadratic_lambda(lambda);
        let report = small_cycle_search(&map, lambda, 8, 0.05).unwrap();
        assert!(!report.cycles.is_empty(), "no small cycle found");
        for c in &report.cycles {
            assert!(c.points.iter().all(|z| z.norm() < 0.05));
        }
        for (q, err) in &report.product_checks {
            assert!(*err < 1e-8, "product identity failed at q={q}: {err}");
        }
    }

    #[test]
    fn no_small_cycles_for_golden_mean() {
        let xi = RotationNumber::GoldenMean;
        let lambda = xi.multiplier();
        let map = RationalMap::quadratic_lambda(lambda);
        let report = small_cycle_search(&map, lambda, 8, 0.01).unwrap();
        assert!(report.cycles.is_empty(), "{:?}", report.cycles);
    }

    #[test]
    fn eta_bound_and_nonvanishing() {
        for k in 0..64 {
            let lambda = Complex64::from_polar(0.5, 2.0 * std::f64::consts::PI * k as f64 / 64.0);
            let v = eta(lambda).unwrap();
            assert!(v.norm() <= 2.0 + 1e-9);
            assert!(v.norm() > 1e-6, "eta vanished at {lambda}");
        }
        // removable singularity at 0: bounded on a tiny circle
        for k in 0..8 {
            let lambda = Complex64::from_polar(1e-3, 0.7 * k as f64);
            assert!(eta(lambda).unwrap().norm() <= 2.0 + 1e-9);
        }
        assert!(eta(Complex64::new(0.0, 0.0)).is_err());
        assert!(eta(Complex64::new(1.2, 0.0)).is_err());
    }

    #[test]
    fn eta_matches_max_disk_radius() {
        for (re, im) in [(0.7, 0.0), (0.4, 0.3), (-0.5, 0.2), (0.1, -0.6)] {
            let lambda = Complex64::new(re, im);
            let v = eta(lambda).unwrap();
            let map = RationalMap::quadratic_lambda(lambda);
            let record = map.classify_fixed_point(Cx::Finite(Complex64::new(0.0, 0.0))).unwrap();
            let disk = max_disk(&map, &record).unwrap();
            assert!((v.norm() - disk.radius).abs() < 1e-8, "lambda={lambda}");
        }
    }

    #[test]
    fn radial_scan_golden_is_siegel() {
        let radii: Vec<f64> = (1..=12).map(|k| 1.0 - 0.5f64.powi(k)).collect();
        let est = radial_scan(&RotationNumber::GoldenMean, &radii).unwrap();
        assert_eq!(est.verdict, ScanVerdict::SiegelEvidence, "{:?}", est.samples);
        assert!(est.rho > 0.0);
        assert!(est.cr_residual < 1e-4, "CR residual {}", est.cr_residual);
        for (_, v) in &est.samples {
            assert!(*v <= 2.0 + 1e-9);
        }
    }

    #[test]
    fn radial_scan_liouville_never_siegel() {
        let xi = construct_liouville(GapSchedule::Custom(vec![2, 52, 60])).unwrap();
        let est = radial_scan(&xi, &default_radial_schedule()).unwrap();
        assert_ne!(est.verdict, ScanVerdict::SiegelEvidence, "{:?}", est.samples);
    }

    #[test]
    fn radial_scan_verdict_consistency() {
        // refining the schedule never upgrades cremer-evidence to siegel
        let xi = construct_liouville(GapSchedule::Custom(vec![2, 52, 60])).unwrap();
        let coarse: Vec<f64> = (1..=12).map(|k| 1.0 - 0.5f64.powi(k)).collect();
        let a = radial_scan(&xi, &coarse).unwrap();
        let b = radial_scan(&xi, &default_radial_schedule()).unwrap();
        if a.verdict == ScanVerdict::CremerEvidence {
            assert_ne!(b.verdict, ScanVerdict::SiegelEvidence);
        }
    }

    #[test]
    fn radial_scan_validates_schedule() {
        let xi = RotationNumber::GoldenMean;
        assert!(radial_scan(&xi, &[]).is_err());
        assert!(radial_scan(&xi, &[0.9, 0.5]).is_err());
        assert!(radial_scan(&xi, &[0.9, 1.0]).is_err());
    }
}
