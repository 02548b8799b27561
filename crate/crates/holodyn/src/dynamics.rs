//! Rational maps on the Riemann sphere: evaluation, orbits, fixed and periodic
//! points, multiplier classification, and Taylor germs at fixed points.

use num_complex::Complex64;

use crate::complex::Cx;
use crate::error::{DynError, Result};
use crate::poly::Polynomial;

/// Default absolute tolerance for "is this point fixed".
pub const FIXED_POINT_TOL: f64 = 1e-10;
/// Band around |lambda| = 1 treated as indifferent.
pub const UNIT_BAND: f64 = 1e-8;
/// Root-of-unity detection: accept xi ~ p/q only this close, with q <= ROOT_UNITY_QMAX.
pub const ROOT_UNITY_EPS: f64 = 1e-9;
pub const ROOT_UNITY_QMAX: u64 = 64;
/// Cap on the polynomial degree the periodic-point solver will accept.
pub const ROOT_DEGREE_CAP: usize = 1 << 9;
/// Cap on Taylor germ truncation order.
pub const GERM_ORDER_CAP: usize = 256;

/// f = P/Q on the Riemann sphere.
#[derive(Clone, Debug)]
pub struct RationalMap {
    num: Polynomial,
    den: Polynomial,
}

impl RationalMap {
    /// Build from numerator and denominator, checking the no-common-root invariant
    /// numerically (mutual root distance below 1e-9 is rejected).
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self> {
        if den.is_zero() {
            return Err(DynError::BadMap("denominator is identically zero".into()));
        }
        if num.is_zero() {
            return Err(DynError::BadMap("numerator is identically zero".into()));
        }
        let map = RationalMap { num, den };
        if map.degree() < 1 {
            return Err(DynError::BadMap("map must have degree >= 1".into()));
        }
        if map.den.degree() >= 1 && map.num.degree() >= 1 {
            let pr = map.num.roots()?;
            let qr = map.den.roots()?;
            for a in &pr {
                for b in &qr {
                    if (a.value - b.value).norm() < 1e-9 {
                        return Err(DynError::BadMap(format!(
                            "numerator and denominator share a root near {}",
                            a.value
                        )));
                    }
                }
            }
        }
        Ok(map)
    }

    /// Polynomial map (denominator 1).
    pub fn polynomial(p: Polynomial) -> Result<Self> {
        RationalMap::new(p, Polynomial::one())
    }

    /// The quadratic z^2 + lambda z.
    pub fn quadratic_lambda(lambda: Complex64) -> Self {
        RationalMap {
            num: Polynomial::new(vec![Complex64::new(0.0, 0.0), lambda, Complex64::new(1.0, 0.0)]),
            den: Polynomial::one(),
        }
    }

    /// The quadratic z^2 + c.
    pub fn quadratic_c(c: Complex64) -> Self {
        RationalMap {
            num: Polynomial::new(vec![c, Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]),
            den: Polynomial::one(),
        }
    }

    pub fn numerator(&self) -> &Polynomial {
        &self.num
    }

    pub fn denominator(&self) -> &Polynomial {
        &self.den
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.degree() == 0
    }

    /// Degree as a map of the sphere.
    pub fn degree(&self) -> usize {
        self.num.degree().max(self.den.degree())
    }

    /// Evaluate at a sphere point. Poles map to infinity; infinity is evaluated
    /// by degree comparison of P and Q.
    pub fn eval(&self, z: Cx) -> Cx {
        match z {
            Cx::Finite(z) => {
                let p = self.num.eval(z);
                let q = self.den.eval(z);
                if q.norm() == 0.0 || (q.norm() < 1e-300 && p.norm() > q.norm() * 1e280) {
                    if p.norm() == 0.0 {
                        // common root is excluded by the constructor; treat as numerical pole
                        return Cx::Inf;
                    }
                    Cx::Inf
                } else {
                    Cx::Finite(p / q)
                }
            }
            Cx::Inf => {
                use std::cmp::Ordering::*;
                match self.num.degree().cmp(&self.den.degree()) {
                    Greater => Cx::Inf,
                    Less => Cx::Finite(Complex64::new(0.0, 0.0)),
                    Equal => Cx::Finite(self.num.leading() / self.den.leading()),
                }
            }
        }
    }

    /// Derivative as a finite complex number where defined.
    pub fn deriv(&self, z: Complex64) -> Complex64 {
        let p = self.num.eval(z);
        let q = self.den.eval(z);
        let dp = self.num.derivative().eval(z);
        let dq = self.den.derivative().eval(z);
        (dp * q - p * dq) / (q * q)
    }

    /// f composed with g: f(g(z)) as a rational map (degrees multiply).
    pub fn compose(&self, g: &RationalMap) -> RationalMap {
        // P(g) / Q(g) with g = Pg/Qg; clear powers of Qg.
        let d = self.num.degree().max(self.den.degree());
        let eval_poly = |poly: &Polynomial| -> Polynomial {
            // sum_k c_k Pg^k Qg^(d-k)
            let mut acc = Polynomial::zero();
            let mut pg_pow = Polynomial::one();
            let mut qg_pows = vec![Polynomial::one()];
            for _ in 0..d {
                qg_pows.push(qg_pows.last().unwrap().mul(&g.den));
            }
            for k in 0..=d {
                let c = poly.coeff(k);
                if c.norm() != 0.0 {
                    acc = acc.add(&pg_pow.mul(&qg_pows[d - k]).scale(c));
                }
                if k < d {
                    pg_pow = pg_pow.mul(&g.num);
                }
            }
            acc
        };
        RationalMap { num: eval_poly(&self.num), den: eval_poly(&self.den) }
    }

    /// The q-th iterate as a rational map. Errors when the resulting degree
    /// exceeds the solver cap.
    pub fn iterate_map(&self, q: usize) -> Result<RationalMap> {
        let degree = self.degree().checked_pow(q as u32).unwrap_or(usize::MAX);
        if degree > ROOT_DEGREE_CAP {
            return Err(DynError::DegreeCap { degree, cap: ROOT_DEGREE_CAP });
        }
        let mut out = self.clone();
        for _ in 1..q {
            out = self.compose(&out);
        }
        Ok(out)
    }

    /// Conjugate by w = 1/z: returns the map w -> 1/f(1/w).
    pub fn conjugate_by_inversion(&self) -> RationalMap {
        let m = self.degree();
        RationalMap { num: self.den.reverse_to(m), den: self.num.reverse_to(m) }
    }

    /// Finite critical points: roots of P'Q - PQ'.
    pub fn critical_points(&self) -> Result<Vec<Complex64>> {
        let num = self
            .num
            .derivative()
            .mul(&self.den)
            .sub(&self.num.mul(&self.den.derivative()));
        Ok(num.roots()?.into_iter().map(|r| r.value).collect())
    }

    /// Record the forward orbit of z0 for up to k steps, stopping early when
    /// |z| exceeds the escape radius.
    pub fn iterate(&self, z0: Cx, k: usize, escape_radius: f64) -> OrbitTrace {
        let mut points = vec![z0];
        let mut z = z0;
        let mut escaped = false;
        let mut escape_index = None;
        if let Cx::Finite(v) = z0 {
            if v.norm() > escape_radius {
                escaped = true;
                escape_index = Some(0);
            }
        }
        for i in 0..k {
            if escaped {
                break;
            }
            z = self.eval(z);
            points.push(z);
            match z {
                Cx::Finite(v) => {
                    if v.norm() > escape_radius {
                        escaped = true;
                        escape_index = Some(i + 1);
                    }
                }
                Cx::Inf => {
                    escaped = true;
                    escape_index = Some(i + 1);
                }
            }
        }
        OrbitTrace { points, escaped, escape_index }
    }

    /// All fixed points on the sphere, classified.
    pub fn find_fixed_points(&self) -> Result<Vec<FixedPointRecord>> {
        // finite fixed points: roots of P(z) - z Q(z)
        let eqn = self.num.sub(&Polynomial::z().mul(&self.den));
        let mut out = Vec::new();
        if !eqn.is_zero() && eqn.degree() >= 1 {
            for root in eqn.roots()? {
                out.push(self.classify_fixed_point_inner(root.value, 1, root.multiplicity)?);
            }
        } else if !eqn.is_zero() {
            // constant nonzero: no finite fixed points
        }
        if self.num.degree() > self.den.degree() {
            out.push(self.classify_infinity()?);
        }
        Ok(out)
    }

    fn classify_infinity(&self) -> Result<FixedPointRecord> {
        let gap = self.num.degree() - self.den.degree();
        let lambda = if gap == 1 {
            self.den.leading() / self.num.leading()
        } else {
            Complex64::new(0.0, 0.0)
        };
        Ok(FixedPointRecord {
            location: Cx::Inf,
            period: 1,
            multiplier: lambda,
            class: classify_multiplier(lambda),
            multiplicity: 1,
        })
    }

    /// Classify a claimed fixed point. Errors if the point is not fixed within
    /// tolerance.
    pub fn classify_fixed_point(&self, z_hat: Cx) -> Result<FixedPointRecord> {
        match z_hat {
            Cx::Inf => {
                if self.num.degree() > self.den.degree() {
                    self.classify_infinity()
                } else {
                    Err(DynError::NotFixed("inf".into(), f64::INFINITY))
                }
            }
            Cx::Finite(z) => {
                let fz = self.eval(Cx::Finite(z));
                let err = fz.dist(&Cx::Finite(z));
                if err > FIXED_POINT_TOL {
                    return Err(DynError::NotFixed(format!("{}", z_hat), err));
                }
                self.classify_fixed_point_inner(z, 1, 0)
            }
        }
    }

    fn classify_fixed_point_inner(
        &self,
        z: Complex64,
        period: usize,
        root_multiplicity: usize,
    ) -> Result<FixedPointRecord> {
        let lambda = self.deriv(z);
        let class = classify_multiplier(lambda);
        // Multiplicity of the fixed point of the relevant iterate: >= 2 exactly
        // when that multiplier is 1. Count vanishing Taylor coefficients.
        let multiplicity = match &class {
            PointClass::RationallyIndifferent { p: _, q } => {
                let iter_map = self.iterate_map(*q as usize);
                match iter_map {
                    Ok(m) => m.multiplicity_at(z).unwrap_or(root_multiplicity.max(1)),
                    Err(_) => root_multiplicity.max(1),
                }
            }
            _ => 1,
        };
        Ok(FixedPointRecord { location: Cx::Finite(z), period, multiplier: lambda, class, multiplicity })
    }

    /// Order of vanishing of f(z_hat + z) - z_hat - z at 0 (the fixed-point
    /// multiplicity when the multiplier is 1).
    fn multiplicity_at(&self, z_hat: Complex64) -> Result<usize> {
        let germ = self.taylor_germ(Cx::Finite(z_hat), 16)?;
        let scale = germ.coefficients.iter().map(|c| c.norm()).fold(1.0, f64::max);
        // germ holds a_1, a_2, ...; multiplicity = 1 + count of leading (a_1-1, a_2, ...) ~ 0
        if (germ.coefficients[0] - Complex64::new(1.0, 0.0)).norm() > 1e-6 {
            return Ok(1);
        }
        for (i, c) in germ.coefficients.iter().enumerate().skip(1) {
            if c.norm() > 1e-8 * scale {
                return Ok(i + 1);
            }
        }
        Ok(1)
    }

    /// All periodic points of period dividing q, with exact period annotated.
    pub fn find_periodic_points(&self, q: usize) -> Result<Vec<FixedPointRecord>> {
        if q < 1 {
            return Err(DynError::Invalid("period must be >= 1".into()));
        }
        let fq = self.iterate_map(q)?;
        let eqn = fq.numerator().sub(&Polynomial::z().mul(fq.denominator()));
        let mut records = Vec::new();
        if !eqn.is_zero() && eqn.degree() >= 1 {
            for root in eqn.roots()? {
                let z = root.value;
                // exact period: smallest divisor of q fixing z
                let mut period = q;
                for divisor in 1..=q {
                    if q % divisor == 0 {
                        let fd = self.iterate_map(divisor)?;
                        if fd.eval(Cx::Finite(z)).dist(&Cx::Finite(z)) < 1e-6 {
                            period = divisor;
                            break;
                        }
                    }
                }
                // multiplier along the cycle (chain rule)
                let mut lambda = Complex64::new(1.0, 0.0);
                let mut w = z;
                for _ in 0..period {
                    lambda *= self.deriv(w);
                    match self.eval(Cx::Finite(w)) {
                        Cx::Finite(v) => w = v,
                        Cx::Inf => {
                            lambda = Complex64::new(f64::INFINITY, 0.0);
                            break;
                        }
                    }
                }
                records.push(FixedPointRecord {
                    location: Cx::Finite(z),
                    period,
                    multiplier: lambda,
                    class: classify_multiplier(lambda),
                    multiplicity: root.multiplicity,
                });
            }
        }
        if self.num.degree() > self.den.degree() {
            records.push(self.classify_infinity()?);
        }
        Ok(records)
    }

    /// Taylor coefficients (a_1, ..., a_N) of f at a fixed point, by polynomial
    /// shifting and power-series division. At infinity the map is first
    /// conjugated by w = 1/z.
    pub fn taylor_germ(&self, z_hat: Cx, n: usize) -> Result<GermSeries> {
        if n > GERM_ORDER_CAP {
            return Err(DynError::OrderCap(n, GERM_ORDER_CAP));
        }
        match z_hat {
            Cx::Inf => {
                let conj = self.conjugate_by_inversion();
                conj.taylor_germ(Cx::zero(), n)
            }
            Cx::Finite(z) => {
                let fz = self.eval(Cx::Finite(z));
                if fz.dist(&Cx::Finite(z)) > 1e-8 {
                    return Err(DynError::NotFixed(format!("{}", z_hat), fz.dist(&Cx::Finite(z))));
                }
                let p = self.num.shift(z);
                let q = self.den.shift(z);
                let series = series_div(&p, &q, n + 1);
                // germ g(w) = f(z_hat + w) - z_hat: drop the constant term
                let coeffs: Vec<Complex64> = series[1..=n].to_vec();
                Ok(GermSeries { coefficients: coeffs, order: n })
            }
        }
    }
}

/// Power-series division p/q to `len` terms (constant term of q nonzero).
pub fn series_div(p: &Polynomial, q: &Polynomial, len: usize) -> Vec<Complex64> {
    let q0 = q.coeff(0);
    let mut out = Vec::with_capacity(len);
    for k in 0..len {
        let mut acc = p.coeff(k);
        for j in 1..=k {
            acc -= q.coeff(j) * out[k - j];
        }
        out.push(acc / q0);
    }
    out
}

/// Trace of a forward orbit.
#[derive(Clone, Debug)]
pub struct OrbitTrace {
    pub points: Vec<Cx>,
    pub escaped: bool,
    pub escape_index: Option<usize>,
}

/// Local classification by multiplier.
#[derive(Clone, Debug, PartialEq)]
pub enum PointClass {
    Superattracting,
    Attracting,
    Repelling,
    /// Multiplier is a primitive q-th root of unity e^{2 pi i p/q}, p/q in lowest terms.
    RationallyIndifferent { p: u64, q: u64 },
    /// |lambda| = 1 with rotation number xi not recognized as rational.
    IrrationallyIndifferent { xi: f64 },
}

impl std::fmt::Display for PointClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PointClass::Superattracting => write!(f, "superattracting"),
            PointClass::Attracting => write!(f, "attracting"),
            PointClass::Repelling => write!(f, "repelling"),
            PointClass::RationallyIndifferent { p, q } => {
                write!(f, "rationally-indifferent({}/{})", p, q)
            }
            PointClass::IrrationallyIndifferent { xi } => {
                write!(f, "irrationally-indifferent(xi={})", xi)
            }
        }
    }
}

/// A fixed or periodic point with its multiplier data.
#[derive(Clone, Debug)]
pub struct FixedPointRecord {
    pub location: Cx,
    pub period: usize,
    pub multiplier: Complex64,
    pub class: PointClass,
    pub multiplicity: usize,
}

/// Taylor germ f(z) = a_1 z + a_2 z^2 + ... at a fixed point moved to the origin.
#[derive(Clone, Debug)]
pub struct GermSeries {
    /// a_1, a_2, ..., a_N.
    pub coefficients: Vec<Complex64>,
    pub order: usize,
}

impl GermSeries {
    pub fn multiplier(&self) -> Complex64 {
        self.coefficients[0]
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in self.coefficients.iter().rev() {
            acc = (acc + c) * z;
        }
        acc
    }
}

/// Classify a multiplier value, with the unit-circle tolerance band and
/// bounded root-of-unity reconstruction.
pub fn classify_multiplier(lambda: Complex64) -> PointClass {
    let r = lambda.norm();
    if r < 1e-10 {
        return PointClass::Superattracting;
    }
    if (r - 1.0).abs() <= UNIT_BAND {
        let xi = (lambda.arg() / (2.0 * std::f64::consts::PI)).rem_euclid(1.0);
        if let Some((p, q)) = rational_reconstruct(xi, ROOT_UNITY_QMAX, ROOT_UNITY_EPS) {
            return PointClass::RationallyIndifferent { p, q };
        }
        return PointClass::IrrationallyIndifferent { xi };
    }
    if r < 1.0 {
        PointClass::Attracting
    } else {
        PointClass::Repelling
    }
}

/// Nearest fraction p/q with q <= qmax and |xi - p/q| < eps, via continued
/// fraction convergents of xi.
pub fn rational_reconstruct(xi: f64, qmax: u64, eps: f64) -> Option<(u64, u64)> {
    // convergent recurrence p_k = a_k p_{k-1} + p_{k-2}; test each convergent
    let (mut p_prev, mut q_prev) = (1i128, 0i128);
    let (mut p_cur, mut q_cur) = (0i128, 1i128); // a_0 = 0 for xi in [0,1)
    let mut x = xi;
    for k in 0..64 {
        let a = x.floor();
        if !(0.0..=1e17).contains(&a) {
            break;
        }
        let ai = a as i128;
        if k > 0 {
            let p_next = ai * p_cur + p_prev;
            let q_next = ai * q_cur + q_prev;
            p_prev = p_cur;
            q_prev = q_cur;
            p_cur = p_next;
            q_cur = q_next;
        }
        if q_cur as u64 > qmax {
            return None;
        }
        if q_cur > 0 {
            let approx = p_cur as f64 / q_cur as f64;
            if (xi - approx).abs() < eps {
                return Some(((p_cur as u64) % (q_cur as u64).max(1), q_cur as u64));
            }
        }
        let frac = x - a;
        if frac.abs() < 1e-15 {
            break;
        }
        x = 1.0 / frac;
    }
    None
}
