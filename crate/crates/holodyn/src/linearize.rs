//! Kœnigs and Böttcher linearizing coordinates: local charts, basin
//! extension, the repelling parametrization, and the maximal linearization
//! disk bounded by a critical point.

use num_complex::Complex64;

use crate::complex::Cx;
use crate::dynamics::{FixedPointRecord, PointClass, RationalMap, UNIT_BAND};
use crate::error::{DynError, Result};

/// Kœnigs limit termination: successive estimates within this distance.
const KOENIGS_STEP_TOL: f64 = 1e-12;
const KOENIGS_CAP: usize = 100_000;

/// A Kœnigs chart at an attracting (0 < |lambda| < 1) or repelling fixed
/// point, normalized by phi'(fixed point) = 1.
#[derive(Clone, Debug)]
pub struct KoenigsChart {
    map: RationalMap,
    fixed: Complex64,
    lambda: Complex64,
    local_radius: f64,
    max_iter: usize,
}

impl KoenigsChart {
    pub fn fixed_point(&self) -> Complex64 {
        self.fixed
    }

    pub fn multiplier(&self) -> Complex64 {
        self.lambda
    }

    pub fn is_attracting(&self) -> bool {
        self.lambda.norm() < 1.0
    }

    pub fn local_radius(&self) -> f64 {
        self.local_radius
    }

    /// phi(z) by the plain geometric limit z_n / lambda^n (attracting) or
    /// lambda^n (z_{-n} - fixed) along the inverse branch (repelling).
    pub fn evaluate(&self, z: Complex64) -> Result<Complex64> {
        if self.is_attracting() {
            self.evaluate_attracting(z)
        } else {
            self.evaluate_repelling(z)
        }
    }

    fn evaluate_attracting(&self, z: Complex64) -> Result<Complex64> {
        let mut cur = z;
        let mut scale = Complex64::new(1.0, 0.0); // lambda^{-n}
        let mut prev = (cur - self.fixed) * scale;
        for _ in 0..self.max_iter {
            cur = match self.map.eval(Cx::Finite(cur)) {
                Cx::Finite(w) => w,
                Cx::Inf => return Err(DynError::NotInBasin(0)),
            };
            scale /= self.lambda;
            let est = (cur - self.fixed) * scale;
            if (est - prev).norm() < KOENIGS_STEP_TOL {
                return Ok(est);
            }
            if !est.is_finite() {
                return Err(DynError::NotInBasin(0));
            }
            prev = est;
        }
        Err(DynError::IterationCap(self.max_iter))
    }

    fn evaluate_repelling(&self, z: Complex64) -> Result<Complex64> {
        // inverse orbit along the branch fixing the repelling point
        let mut cur = z;
        let mut scale = Complex64::new(1.0, 0.0); // lambda^n
        let mut prev = cur - self.fixed;
        for _ in 0..self.max_iter {
            cur = self.local_inverse(cur)?;
            scale *= self.lambda;
            let est = (cur - self.fixed) * scale;
            if (est - prev).norm() < KOENIGS_STEP_TOL {
                return Ok(est);
            }
            prev = est;
        }
        Err(DynError::IterationCap(self.max_iter))
    }

    /// The inverse branch fixing the repelling point: Newton on
    /// P(w) - target Q(w) = 0 seeded by the linear prediction.
    fn local_inverse(&self, target: Complex64) -> Result<Complex64> {
        let mut w = self.fixed + (target - self.fixed) / self.lambda;
        for _ in 0..64 {
            let val = match self.map.eval(Cx::Finite(w)) {
                Cx::Finite(v) => v,
                Cx::Inf => return Err(DynError::NotInBasin(0)),
            };
            let der = self.map.deriv(w);
            if der.norm() < 1e-300 {
                return Err(DynError::Domain("derivative vanished in inverse branch".into()));
            }
            let step = (val - target) / der;
            w -= step;
            if step.norm() < 1e-15 * (1.0 + w.norm()) {
                return Ok(w);
            }
        }
        Err(DynError::Domain("inverse branch Newton failed to converge".into()))
    }
}

/// Build the Kœnigs chart at an attracting or repelling fixed point.
pub fn koenigs_chart(map: &RationalMap, record: &FixedPointRecord) -> Result<KoenigsChart> {
    let fixed = match record.location {
        Cx::Finite(z) => z,
        Cx::Inf => return Err(DynError::WrongClass("at-infinity".into(), "conjugate by inversion first".into())),
    };
    let lambda = record.multiplier;
    let m = lambda.norm();
    if m < 1e-14 {
        return Err(DynError::WrongClass("superattracting".into(), "use the Böttcher chart".into()));
    }
    if (m - 1.0).abs() <= UNIT_BAND {
        return Err(DynError::WrongClass("indifferent".into(), "use the parabolic/Siegel machinery".into()));
    }
    // local radius heuristic: a fraction of the distance to the nearest
    // critical point (the obstruction in Theorem 6.6)
    let mut radius = 0.5f64;
    if let Ok(crit) = map.critical_points() {
        for c in crit {
            let d = (c - fixed).norm();
            if d > 1e-12 {
                radius = radius.min(0.5 * d);
            }
        }
    }
    Ok(KoenigsChart { map: map.clone(), fixed, lambda, local_radius: radius, max_iter: KOENIGS_CAP })
}

/// Same chart with an explicit iteration cap (uniqueness testing).
pub fn koenigs_chart_with_cap(
    map: &RationalMap,
    record: &FixedPointRecord,
    max_iter: usize,
) -> Result<KoenigsChart> {
    let mut chart = koenigs_chart(map, record)?;
    chart.max_iter = max_iter;
    Ok(chart)
}

/// Basin-wide extension of an attracting Kœnigs coordinate: follow the
/// orbit into the local disk, then phi(z_n) * lambda^{-n}.
pub fn koenigs_extend(chart: &KoenigsChart, z0: Complex64) -> Result<Complex64> {
    if !chart.is_attracting() {
        return Err(DynError::WrongClass("repelling".into(), "extension requires an attracting chart".into()));
    }
    let switch = 0.1 * chart.local_radius;
    let mut z = z0;
    let mut scale = Complex64::new(1.0, 0.0); // lambda^{-n}
    for _ in 0..chart.max_iter {
        if (z - chart.fixed).norm() < switch {
            return Ok(chart.evaluate(z)? * scale);
        }
        z = match chart.map.eval(Cx::Finite(z)) {
            Cx::Finite(w) => w,
            Cx::Inf => return Err(DynError::NotInBasin(0)),
        };
        scale /= chart.lambda;
        if !z.is_finite() {
            return Err(DynError::NotInBasin(0));
        }
    }
    Err(DynError::NotInBasin(chart.max_iter))
}

/// Inverse parametrization psi at a repelling point: psi(0) = fixed point,
/// psi'(0) = 1, f(psi(w)) = psi(lambda w), defined on all of C (values on
/// the sphere). Computed as lim f^m(fixed + w lambda^{-m}).
pub fn repelling_parametrization(chart: &KoenigsChart, w: Complex64) -> Result<Cx> {
    if chart.is_attracting() {
        return Err(DynError::WrongClass("attracting".into(), "the parametrization requires a repelling chart".into()));
    }
    if w.norm() == 0.0 {
        return Ok(Cx::Finite(chart.fixed));
    }
    let m = chart.lambda.norm();
    // pull w below a small fraction of the local radius
    let target = 0.005 * chart.local_radius;
    let mut steps = ((w.norm() / target).ln() / m.ln()).ceil().max(0.0) as usize;
    steps += 8; // margin so the quadratic seeding error is negligible
    let mut z = Cx::Finite(chart.fixed + w / chart.lambda.powu(steps as u32));
    for _ in 0..steps {
        z = chart.map.eval(z);
    }
    Ok(z)
}

/// The maximal round disk in Kœnigs coordinates: bounded by the critical
/// point of smallest |phi|.
#[derive(Clone, Debug)]
pub struct MaxDiskReport {
    pub radius: f64,
    pub boundary_critical_point: Complex64,
    /// sample points z with |phi(z)| = radius (boundary of U)
    pub boundary_sample: Vec<Complex64>,
}

pub fn max_disk(map: &RationalMap, record: &FixedPointRecord) -> Result<MaxDiskReport> {
    let chart = koenigs_chart(map, record)?;
    if !chart.is_attracting() {
        return Err(DynError::WrongClass("repelling".into(), "the max disk requires an attracting point".into()));
    }
    let mut best: Option<(f64, Complex64)> = None;
    for c in map.critical_points()? {
        match koenigs_extend(&chart, c) {
            Ok(val) => {
                let r = val.norm();
                if r > 1e-13 && best.map_or(true, |(b, _)| r < b) {
                    best = Some((r, c));
                }
            }
            Err(DynError::NotInBasin(_)) | Err(DynError::IterationCap(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    let (radius, omega) = best.ok_or(DynError::NoCriticalPoint)?;
    // boundary sample: along rays from the fixed point, bisect |phi| = r
    let mut boundary_sample = Vec::new();
    for k in 0..16 {
        let theta = 2.0 * std::f64::consts::PI * k as f64 / 16.0;
        let dir = Complex64::from_polar(1.0, theta);
        if let Some(z) = bisect_level(&chart, dir, radius) {
            boundary_sample.push(z);
        }
    }
    Ok(MaxDiskReport { radius, boundary_critical_point: omega, boundary_sample })
}

/// Find t with |phi(fixed + t dir)| = level along a ray (first crossing).
fn bisect_level(chart: &KoenigsChart, dir: Complex64, level: f64) -> Option<Complex64> {
    let phi_mag = |t: f64| -> Option<f64> {
        koenigs_extend(chart, chart.fixed + t * dir).ok().map(|v| v.norm())
    };
    let mut lo = 0.0;
    let mut hi = f64::NAN;
    let mut t = 0.05 * chart.local_radius;
    for _ in 0..60 {
        match phi_mag(t) {
            Some(m) if m < level => {
                lo = t;
                t *= 1.5;
            }
            Some(_) => {
                hi = t;
                break;
            }
            None => {
                hi = t;
                break;
            }
        }
    }
    if !hi.is_finite() {
        return None;
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        match phi_mag(mid) {
            Some(m) if m < level => lo = mid,
            _ => hi = mid,
        }
    }
    let t = 0.5 * (lo + hi);
    phi_mag(t).map(|_| chart.fixed + t * dir)
}

/// Böttcher chart at a superattracting fixed point (finite, or infinity
/// for a polynomial). Conjugates f to w -> w^n on its local domain.
#[derive(Clone, Debug)]
pub struct BoettcherChart {
    map: RationalMap,
    at_infinity: bool,
    fixed: Complex64,
    /// local degree
    pub degree: usize,
    /// leading local coefficient a (f(z) ~ fixed + a (z - fixed)^n, or
    /// f(z) ~ a z^n at infinity)
    pub leading: Complex64,
    /// normalizer alpha with alpha^(n-1) = a
    pub alpha: Complex64,
}

pub fn boettcher_chart(map: &RationalMap, record: &FixedPointRecord) -> Result<BoettcherChart> {
    match record.class {
        PointClass::Superattracting => {}
        _ => return Err(DynError::WrongClass("non-superattracting".into(), "the Böttcher chart needs a superattracting point".into())),
    }
    match record.location {
        Cx::Inf => {
            if !map.is_polynomial() {
                return Err(DynError::BadMap("infinity chart requires a polynomial".into()));
            }
            let n = map.numerator().degree();
            if n < 2 {
                return Err(DynError::WrongClass("degree-1".into(), "degree must be at least 2".into()));
            }
            let a = map.numerator().leading();
            let alpha = root_principal(a, n - 1);
            Ok(BoettcherChart {
                map: map.clone(),
                at_infinity: true,
                fixed: Complex64::new(0.0, 0.0),
                degree: n,
                leading: a,
                alpha,
            })
        }
        Cx::Finite(zhat) => {
            let germ = map.taylor_germ(record.location, 8)?;
            let coeffs = germ.coefficients.clone();
            let mut n = 0;
            for (k, c) in coeffs.iter().enumerate() {
                if c.norm() > 1e-12 {
                    n = k + 1;
                    break;
                }
            }
            if n < 2 {
                return Err(DynError::WrongClass("degree-1".into(), "local degree must be at least 2".into()));
            }
            let a = coeffs[n - 1];
            let alpha = root_principal(a, n - 1);
            Ok(BoettcherChart {
                map: map.clone(),
                at_infinity: false,
                fixed: zhat,
                degree: n,
                leading: a,
                alpha,
            })
        }
    }
}

/// Principal k-th root.
fn root_principal(a: Complex64, k: usize) -> Complex64 {
    if k == 1 {
        return a;
    }
    let (r, th) = a.to_polar();
    Complex64::from_polar(r.powf(1.0 / k as f64), th / k as f64)
}

impl BoettcherChart {
    fn local(&self, z: Cx) -> Option<Complex64> {
        match (self.at_infinity, z) {
            (true, Cx::Finite(z)) => Some(z),
            (true, Cx::Inf) => None,
            (false, Cx::Finite(z)) => Some(z - self.fixed),
            (false, Cx::Inf) => None,
        }
    }

    /// phi(z) by the telescoping product in log space:
    /// log phi = log(a)/(n-1) + log u_0 + sum n^{-(k+1)} Log(u_{k+1}/(a u_k^n)).
    pub fn evaluate(&self, z: Complex64) -> Result<Complex64> {
        let n = self.degree as f64;
        let mut u = self
            .local(Cx::Finite(z))
            .ok_or_else(|| DynError::Domain("point at infinity".into()))?;
        if u.norm() == 0.0 {
            return Err(DynError::Domain("chart has a logarithmic singularity at the fixed point".into()));
        }
        let mut log_phi = self.leading.ln() / (n - 1.0) + u.ln();
        let mut weight = 1.0 / n;
        let mut cur = Cx::Finite(if self.at_infinity { u } else { u + self.fixed });
        for _ in 0..200 {
            let next = self.map.eval(cur);
            let u_next = match self.local(next) {
                Some(v) => v,
                None => break, // orbit reached infinity: remaining factors are 1
            };
            let ratio = u_next / (self.leading * u.powu(self.degree as u32));
            if !ratio.is_finite() || (ratio - 1.0).norm() > 0.8 {
                return Err(DynError::Domain(
                    "point outside the guaranteed Böttcher domain".into(),
                ));
            }
            let term = ratio.ln() * weight;
            log_phi += term;
            if term.norm() < 1e-17 {
                break;
            }
            weight /= n;
            u = u_next;
            cur = next;
        }
        Ok(log_phi.exp())
    }

    /// The log-lift F(Z) = n Z + Log(g(e^Z)/e^{nZ}) of the normalized map
    /// g = alpha f(./alpha) on the half-plane where the correction is small.
    /// Branch bookkeeping gives F(Z + 2 pi i) = F(Z) + 2 pi i n exactly.
    pub fn lift(&self, zvar: Complex64) -> Result<Complex64> {
        if !self.at_infinity {
            return Err(DynError::Domain("log-lift is defined for the chart at infinity".into()));
        }
        let n = self.degree as f64;
        let z = zvar.exp();
        let w = z / self.alpha; // normalized coordinate: g(zeta) = alpha f(zeta/alpha)... inverse
        let fw = match self.map.eval(Cx::Finite(w)) {
            Cx::Finite(v) => v,
            Cx::Inf => return Err(DynError::Domain("pole in lift".into())),
        };
        let g = self.alpha * fw;
        // g(e^Z) e^{-nZ}: near 1 on the working half-plane
        let corr = g * (-zvar * n).exp();
        if !corr.is_finite() || (corr - 1.0).norm() >= 1.0 {
            return Err(DynError::Domain("outside the |F(Z)-nZ|<1 half-plane".into()));
        }
        Ok(zvar * n + corr.ln())
    }

    /// Abscissa sigma of a working half-plane Re Z > sigma on which
    /// |F(Z) - nZ| < 1 holds.
    pub fn sigma(&self) -> f64 {
        let scale: f64 = self.map.numerator().coeffs().iter().map(|c| c.norm()).sum::<f64>().max(1.0);
        (4.0 * scale).ln()
    }
}
