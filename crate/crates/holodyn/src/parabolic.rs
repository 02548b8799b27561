//! Parabolic fixed points: attraction directions, petal geometry through
//! the chart w = b/z^n, Fatou coordinates solving the Abel equation
//! alpha(f(z)) = 1 + alpha(z), basin extension, and the global repelling
//! parametrization beta with f(beta(w)) = beta(1 + w).

use num_complex::Complex64;

use crate::complex::Cx;
use crate::dynamics::{FixedPointRecord, PointClass, RationalMap};
use crate::error::{DynError, Result};

/// Truncation order used when hunting for the first nonlinear coefficient.
const MULTIPLICITY_ORDER: usize = 12;

/// Compose two germ coefficient vectors (a_1, a_2, ...; no constant term)
/// to the given order: result = g(h(z)).
fn germ_compose(g: &[Complex64], h: &[Complex64], order: usize) -> Vec<Complex64> {
    // Horner over the outer series: acc = a_N*h^0-shifted evaluation in the
    // algebra of power series without constant term
    let mul = |p: &[Complex64], q: &[Complex64]| -> Vec<Complex64> {
        // both indexed by power-1; product of z^(i+1) and z^(j+1) is z^(i+j+2)
        let mut out = vec![Complex64::new(0.0, 0.0); order];
        for (i, pi) in p.iter().enumerate() {
            if pi.norm() == 0.0 {
                continue;
            }
            for (j, qj) in q.iter().enumerate() {
                let k = i + j + 1;
                if k < order {
                    out[k] += pi * qj;
                }
            }
        }
        out
    };
    let mut acc = vec![Complex64::new(0.0, 0.0); order];
    let mut h_pow = h.to_vec(); // h^1
    h_pow.resize(order, Complex64::new(0.0, 0.0));
    let mut power = h_pow.clone();
    for (k, gk) in g.iter().enumerate().take(order) {
        if gk.norm() != 0.0 {
            for (i, c) in power.iter().enumerate() {
                acc[i] += gk * c;
            }
        }
        if k + 1 < g.len().min(order) {
            power = mul(&power, &h_pow);
        }
    }
    acc
}

/// Local data of a parabolic point: the base map, the iterate count q (the
/// germ of f^q has multiplier 1), the fixed point, and the leading
/// nonlinear coefficient a of z + a z^(n+1) + ...
#[derive(Clone, Debug)]
struct LocalData {
    map: RationalMap,
    q: usize,
    fixed: Complex64,
    n: usize,
    a: Complex64,
}

impl LocalData {
    /// One step of f^q.
    fn forward(&self, z: Complex64) -> Result<Complex64> {
        let mut cur = z;
        for _ in 0..self.q {
            cur = match self.map.eval(Cx::Finite(cur)) {
                Cx::Finite(w) => w,
                Cx::Inf => return Err(DynError::Domain("orbit hit a pole".into())),
            };
        }
        Ok(cur)
    }

    /// One step of f^(-q): the local inverse branch near the fixed point,
    /// by Newton seeded at the target (f is near the identity there).
    fn backward(&self, z: Complex64) -> Result<Complex64> {
        let mut cur = z;
        for _ in 0..self.q {
            let target = cur;
            let mut x = target;
            let mut done = false;
            for _ in 0..64 {
                let val = match self.map.eval(Cx::Finite(x)) {
                    Cx::Finite(v) => v,
                    Cx::Inf => return Err(DynError::Domain("pole in inverse branch".into())),
                };
                let der = self.map.deriv(x);
                if der.norm() < 1e-300 {
                    return Err(DynError::Domain("vanishing derivative in inverse".into()));
                }
                let step = (val - target) / der;
                x -= step;
                if step.norm() < 1e-16 * (1.0 + x.norm()) {
                    done = true;
                    break;
                }
            }
            if !done {
                return Err(DynError::Domain("inverse Newton did not converge".into()));
            }
            cur = x;
        }
        Ok(cur)
    }

    fn step(&self, z: Complex64, inverse: bool) -> Result<Complex64> {
        if inverse {
            self.backward(z)
        } else {
            self.forward(z)
        }
    }
}

/// Find q and the germ of f^q at the record's fixed point.
fn local_data(map: &RationalMap, record: &FixedPointRecord) -> Result<LocalData> {
    let q = match record.class {
        PointClass::RationallyIndifferent { q, .. } => q as usize,
        _ => {
            return Err(DynError::WrongClass(
                format!("{}", record.class),
                "parabolic machinery needs a rationally indifferent point".into(),
            ))
        }
    };
    let fixed = match record.location {
        Cx::Finite(z) => z,
        Cx::Inf => {
            return Err(DynError::WrongClass(
                "at-infinity".into(),
                "conjugate the parabolic point to a finite position first".into(),
            ))
        }
    };
    let base = map.taylor_germ(record.location, MULTIPLICITY_ORDER)?.coefficients;
    let mut germ = base.clone();
    for _ in 1..q {
        germ = germ_compose(&base, &germ, MULTIPLICITY_ORDER);
    }
    let (n, a) = leading_nonlinear(&germ)?;
    Ok(LocalData { map: map.clone(), q, fixed, n, a })
}

/// First nonvanishing coefficient of z + a z^(n+1) + ...; requires
/// multiplier 1 within tolerance.
fn leading_nonlinear(germ: &[Complex64]) -> Result<(usize, Complex64)> {
    if (germ[0] - Complex64::new(1.0, 0.0)).norm() > 1e-8 {
        return Err(DynError::WrongClass(
            "non-parabolic germ".into(),
            "pass the germ of the q-fold iterate so the multiplier is 1".into(),
        ));
    }
    for (k, c) in germ.iter().enumerate().skip(1) {
        if c.norm() > 1e-9 {
            return Ok((k, *c));
        }
    }
    Err(DynError::Parabolic(format!(
        "all coefficients through order {} vanish; possibly an identity iterate",
        germ.len()
    )))
}

/// Attraction data at a parabolic germ with multiplier 1.
pub fn attraction_directions(
    germ: &[Complex64],
) -> Result<(usize, Vec<Complex64>, Vec<Complex64>)> {
    let (n, a) = leading_nonlinear(germ)?;
    let arg_a = a.arg();
    let mut attracting = Vec::with_capacity(n);
    let mut repelling = Vec::with_capacity(n);
    for j in 0..n {
        let tau = 2.0 * std::f64::consts::PI * j as f64;
        // a v^n real negative: arg v = (pi - arg a + 2 pi j)/n
        attracting.push(Complex64::from_polar(
            1.0,
            (std::f64::consts::PI - arg_a + tau) / n as f64,
        ));
        // a v^n real positive
        repelling.push(Complex64::from_polar(1.0, (-arg_a + tau) / n as f64));
    }
    Ok((n, attracting, repelling))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PetalType {
    Attracting,
    Repelling,
}

/// One petal of a parabolic point, carried through the chart w = b/(z-z0)^n.
#[derive(Clone, Debug)]
pub struct PetalSpec {
    pub index: usize,
    pub petal_type: PetalType,
    /// chart constant: b = -1/(n a) for attracting petals, +1/(n a) for
    /// repelling ones (so that the petal maps to a right wedge)
    pub b: Complex64,
    pub epsilon: f64,
    /// wedge parameter: the petal w-image is {u + iv : u > c - |v|/tan 2e}
    pub r: f64,
    pub c: f64,
    /// central unit direction in the z-plane
    pub direction: Complex64,
    /// sample polygon on the petal boundary (z-plane)
    pub sample: Vec<Complex64>,
    local: LocalData,
}

impl PetalSpec {
    pub fn fixed_point(&self) -> Complex64 {
        self.local.fixed
    }

    pub fn petals_per_type(&self) -> usize {
        self.local.n
    }

    /// w = b/(z - z0)^n (branch-free).
    pub fn to_w(&self, z: Complex64) -> Complex64 {
        self.b / (z - self.local.fixed).powu(self.local.n as u32)
    }

    /// Branch-pinned inverse chart: z on this petal with w = b/(z-z0)^n.
    pub fn from_w(&self, w: Complex64) -> Complex64 {
        let n = self.local.n as f64;
        let ratio = self.b / w;
        let rho = ratio.norm().powf(1.0 / n);
        // relative argument to the chart constant, wrapped to (-pi, pi]
        let mut rel = ratio.arg() - self.b.arg();
        while rel > std::f64::consts::PI {
            rel -= 2.0 * std::f64::consts::PI;
        }
        while rel <= -std::f64::consts::PI {
            rel += 2.0 * std::f64::consts::PI;
        }
        let u = rho * Complex64::from_polar(1.0, self.direction.arg() + rel / n);
        self.local.fixed + u
    }

    /// Membership in the w-plane wedge {u > c - |v|/tan 2e}.
    pub fn w_in_region(&self, w: Complex64) -> bool {
        w.re > self.c - w.im.abs() / (2.0 * self.epsilon).tan()
    }

    /// Petal membership in the z-plane: the wedge condition plus the
    /// sector of this petal's direction.
    pub fn contains(&self, z: Complex64) -> bool {
        let u = z - self.local.fixed;
        if u.norm() == 0.0 {
            return false;
        }
        // the wedge rays emanate from (c, 0) at angles +-(pi - 2e), so the
        // z-plane sector of this petal has half-width (pi - 2e)/n
        let n = self.local.n as f64;
        let half_width = (std::f64::consts::PI - 2.0 * self.epsilon) / n + 1e-12;
        let mut d = u.arg() - self.direction.arg();
        while d > std::f64::consts::PI {
            d -= 2.0 * std::f64::consts::PI;
        }
        while d <= -std::f64::consts::PI {
            d += 2.0 * std::f64::consts::PI;
        }
        d.abs() <= half_width && self.w_in_region(self.to_w(z))
    }

    fn inverse_dynamics(&self) -> bool {
        self.petal_type == PetalType::Repelling
    }

    /// The petal-adapted step: f^q on attracting petals, f^(-q) on
    /// repelling ones, expressed in the w-plane (approximately w + 1).
    pub fn step_w(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        let z_next = self.local.step(z, self.inverse_dynamics())?;
        Ok((z_next, self.to_w(z_next)))
    }
}

/// Construct the n attracting and n repelling petals of a parabolic point.
/// The inner radius r is doubled until the translation certificate
/// |w' - w - 1| < sin(epsilon) holds on a boundary and interior grid.
pub fn build_petals(
    map: &RationalMap,
    record: &FixedPointRecord,
    epsilon: f64,
) -> Result<Vec<PetalSpec>> {
    if !(epsilon > 0.0 && epsilon < std::f64::consts::PI / 8.0) {
        return Err(DynError::Invalid(format!(
            "epsilon must lie in (0, pi/8), got {epsilon}"
        )));
    }
    let local = local_data(map, record)?;
    let n = local.n;
    let na = local.a * n as f64;
    let germ: Vec<Complex64> = {
        // reconstruct enough of the germ for directions
        let base = map.taylor_germ(record.location, MULTIPLICITY_ORDER)?.coefficients;
        let mut g = base.clone();
        for _ in 1..local.q {
            g = germ_compose(&base, &g, MULTIPLICITY_ORDER);
        }
        g
    };
    let (_, attracting_dirs, repelling_dirs) = attraction_directions(&germ)?;

    let mut petals = Vec::with_capacity(2 * n);
    for (ty, dirs, b) in [
        (PetalType::Attracting, &attracting_dirs, -1.0 / na),
        (PetalType::Repelling, &repelling_dirs, 1.0 / na),
    ] {
        for (j, dir) in dirs.iter().enumerate() {
            let mut r = 4.0f64;
            let mut built = None;
            while r < 1e9 {
                let spec = PetalSpec {
                    index: j,
                    petal_type: ty,
                    b,
                    epsilon,
                    r,
                    c: r / (2.0 * epsilon).sin(),
                    direction: *dir,
                    sample: Vec::new(),
                    local: local.clone(),
                };
                if certify_petal(&spec) {
                    built = Some(spec);
                    break;
                }
                r *= 2.0;
            }
            let mut spec = built.ok_or_else(|| {
                DynError::Parabolic(format!(
                    "could not certify |w'-w-1| < sin(eps) for petal {j} ({ty:?}) below r = 1e9"
                ))
            })?;
            spec.sample = boundary_sample(&spec, 40);
            petals.push(spec);
        }
    }
    Ok(petals)
}

/// Translation certificate on a grid over the wedge boundary and interior.
fn certify_petal(spec: &PetalSpec) -> bool {
    let tol = spec.epsilon.sin();
    for w in certificate_points(spec) {
        let z = spec.from_w(w);
        match spec.step_w(z) {
            Ok((_, w_next)) => {
                if (w_next - w - 1.0).norm() >= tol {
                    return false;
                }
            }
            Err(_) => return false,
        }
    }
    true
}

fn certificate_points(spec: &PetalSpec) -> Vec<Complex64> {
    let mut pts = Vec::new();
    let cot = 1.0 / (2.0 * spec.epsilon).tan();
    // boundary rays out to 100 c
    for k in 0..40 {
        let v = spec.c * 0.05 * 1.25f64.powi(k);
        // tiny inward offset so the point is in the open region
        let u = spec.c - v * cot + 1e-9 * spec.c;
        pts.push(Complex64::new(u, v));
        pts.push(Complex64::new(u, -v));
    }
    // interior fan
    for k in 0..12 {
        for m in 1..8 {
            let radius = spec.c * (1.0 + m as f64);
            let th = (k as f64 / 11.0 - 0.5) * 2.0 * (std::f64::consts::PI / 2.0);
            let w = Complex64::new(spec.c, 0.0) + Complex64::from_polar(radius, th);
            if spec.w_in_region(w) {
                pts.push(w);
            }
        }
    }
    pts.push(Complex64::new(spec.c + 1e-9, 0.0));
    pts
}

/// Points along the petal boundary (z-plane).
fn boundary_sample(spec: &PetalSpec, count: usize) -> Vec<Complex64> {
    let cot = 1.0 / (2.0 * spec.epsilon).tan();
    let mut out = Vec::with_capacity(count);
    let half = count / 2;
    for k in 0..half {
        let v = spec.c * 0.02 * 1.35f64.powi(k as i32);
        let u = spec.c - v * cot + 1e-9 * spec.c;
        out.push(spec.from_w(Complex64::new(u, v)));
        out.push(spec.from_w(Complex64::new(u, -v)));
    }
    out.push(spec.from_w(Complex64::new(spec.c + 1e-9, 0.0)));
    out
}

/// Fatou coordinate chart on a petal. On attracting petals alpha satisfies
/// alpha(f^q(z)) = alpha(z) + 1; on repelling petals the chart is built for
/// the inverse dynamics, so alpha(f^(-q)(z)) = alpha(z) + 1.
#[derive(Clone, Debug)]
pub struct FatouChart {
    pub petal: PetalSpec,
    /// coefficient of the 1/w term of the translation defect (the
    /// "iterative residue" driving the logarithmic correction)
    pub log_coefficient: Complex64,
    /// base index of the checkpoint ladder used by the limit evaluator
    base_steps: usize,
}

/// Build the Fatou coordinate on a petal (either type; repelling petals are
/// attracting petals of the inverse map).
pub fn fatou_coordinate(petal: &PetalSpec) -> Result<FatouChart> {
    // estimate A = lim w (F(w) - w - 1) by Richardson at two scales
    let scale = (petal.c * 50.0).max(1e5);
    let mut samples = Vec::new();
    for mult in [1.0, 2.0] {
        let w = Complex64::new(scale * mult, 0.0);
        let z = petal.from_w(w);
        let (_, w1) = petal.step_w(z)?;
        samples.push(w * (w1 - w - 1.0));
    }
    let log_coefficient = 2.0 * samples[1] - samples[0];
    Ok(FatouChart { petal: petal.clone(), log_coefficient, base_steps: 1 << 14 })
}

impl FatouChart {
    /// Same chart with a custom checkpoint base (render-grade: smaller).
    pub fn with_base_steps(mut self, base: usize) -> Self {
        self.base_steps = base.max(64);
        self
    }

    /// alpha(z) for z on the petal: the limit of w_k - k - A log w_k,
    /// accelerated by fitting the tail model alpha + c1/k + c2 log(k)/k
    /// at checkpoints k, 2k, 4k.
    pub fn evaluate(&self, z: Complex64) -> Result<Complex64> {
        if !self.petal.contains(z) {
            return Err(DynError::Domain("point is not on the petal".into()));
        }
        let ks = [self.base_steps, 2 * self.base_steps, 4 * self.base_steps];
        let mut cur = z;
        let mut s = [Complex64::new(0.0, 0.0); 3];
        let mut k = 0usize;
        for (i, &kc) in ks.iter().enumerate() {
            while k < kc {
                let (z_next, _) = self.petal.step_w(cur)?;
                cur = z_next;
                k += 1;
            }
            let w = self.petal.to_w(cur);
            s[i] = w - Complex64::new(k as f64, 0.0) - self.log_coefficient * w.ln();
        }
        // solve [1, 1/k, ln k / k] alpha-model exactly at the 3 checkpoints
        let mut m = [[Complex64::new(0.0, 0.0); 3]; 3];
        for (i, &kc) in ks.iter().enumerate() {
            let kf = kc as f64;
            m[i][0] = Complex64::new(1.0, 0.0);
            m[i][1] = Complex64::new(1.0 / kf, 0.0);
            m[i][2] = Complex64::new(kf.ln() / kf, 0.0);
        }
        solve3(m, s)
    }

    /// Invert alpha on this petal by a damped fixed-point/Newton iteration
    /// in the w-plane, seeded at the target.
    pub fn invert(&self, target: Complex64) -> Result<Complex64> {
        let mut w = target + self.log_coefficient * target.ln();
        if !self.petal.w_in_region(w) {
            // pull the seed into the wedge interior
            w = Complex64::new(w.re.max(self.petal.c * 1.5), w.im);
        }
        for _ in 0..60 {
            let z = self.petal.from_w(w);
            let val = self.evaluate(z)?;
            let diff = val - target;
            if diff.norm() < 1e-9 {
                return Ok(z);
            }
            // d alpha / d w ~ 1 + A/w
            let deriv = Complex64::new(1.0, 0.0) + self.log_coefficient / w;
            w -= diff / deriv;
            if !self.petal.w_in_region(w) {
                return Err(DynError::Domain(
                    "inversion left the certified petal region".into(),
                ));
            }
        }
        Err(DynError::IterationCap(60))
    }
}

/// Solve a 3x3 complex system m x = rhs by Gaussian elimination.
fn solve3(mut m: [[Complex64; 3]; 3], mut rhs: [Complex64; 3]) -> Result<Complex64> {
    for col in 0..3 {
        let mut piv = col;
        for row in col + 1..3 {
            if m[row][col].norm() > m[piv][col].norm() {
                piv = row;
            }
        }
        m.swap(col, piv);
        rhs.swap(col, piv);
        if m[col][col].norm() < 1e-300 {
            return Err(DynError::Invalid("singular extrapolation system".into()));
        }
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            for k in col..3 {
                let sub = f * m[col][k];
                m[row][k] -= sub;
            }
            let sub = f * rhs[col];
            rhs[row] -= sub;
        }
    }
    // back-substitute; only x0 (the constant term alpha) is needed
    let x2 = rhs[2] / m[2][2];
    let x1 = (rhs[1] - m[1][2] * x2) / m[1][1];
    let x0 = (rhs[0] - m[0][1] * x1 - m[0][2] * x2) / m[0][0];
    Ok(x0)
}

/// Basin-wide Abel coordinate: follow the orbit of f^q until it enters the
/// chart's petal, then alpha(z_k) - k.
pub fn abel_extend(chart: &FatouChart, z0: Complex64) -> Result<Complex64> {
    if chart.petal.inverse_dynamics() {
        return Err(DynError::WrongClass(
            "repelling".into(),
            "basin extension works on attracting petals".into(),
        ));
    }
    let mut z = z0;
    for k in 0..100_000usize {
        if chart.petal.contains(z) {
            return Ok(chart.evaluate(z)? - Complex64::new(k as f64, 0.0));
        }
        z = chart.petal.local.step(z, false)?;
        if !z.is_finite() {
            return Err(DynError::NotInBasin(k));
        }
    }
    Err(DynError::NotInBasin(100_000))
}

/// Global repelling parametrization beta: the inverse Abel coordinate of
/// the repelling petal, extended to all of C by f(beta(w)) = beta(1 + w).
/// `chart` must be built on a repelling petal.
pub fn repelling_global(chart: &FatouChart, w: Complex64) -> Result<Cx> {
    if !chart.petal.inverse_dynamics() {
        return Err(DynError::WrongClass(
            "attracting".into(),
            "the global parametrization needs a repelling-petal chart".into(),
        ));
    }
    // alpha(z) := -alpha_inv(z) satisfies alpha(f(z)) = alpha(z) + 1 and its
    // image contains a left half-plane; beta(w) = f^k(alpha_inv^{-1}(k - w))
    let margin = chart.petal.c + 5.0;
    let k = (w.re + margin).ceil().max(0.0) as usize;
    let target = Complex64::new(k as f64, 0.0) - w;
    let mut z = chart.invert(target)?;
    let mut out = Cx::Finite(z);
    for _ in 0..k {
        out = chart.petal.local.map.eval(out);
        // route through f^q per step-count convention of the chart
        for _ in 1..chart.petal.local.q {
            out = chart.petal.local.map.eval(out);
        }
        if let Cx::Finite(v) = out {
            z = v;
        } else {
            return Ok(Cx::Inf);
        }
    }
    let _ = z;
    Ok(out)
}

/// The asymptotic direction lim (z_k - z0hat)/|z_k - z0hat| of a parabolic
/// basin orbit (Problem 7-1): identified by the attracting petal the orbit
/// settles in; the limit is exactly that petal's direction.
pub fn direction_of_convergence(
    map: &RationalMap,
    record: &FixedPointRecord,
    z0: Complex64,
) -> Result<Complex64> {
    let petals = build_petals(map, record, std::f64::consts::PI / 16.0)?;
    let attracting: Vec<&PetalSpec> =
        petals.iter().filter(|p| p.petal_type == PetalType::Attracting).collect();
    let mut z = z0;
    for _ in 0..200_000usize {
        for p in &attracting {
            if p.contains(z) {
                return Ok(p.direction);
            }
        }
        z = attracting[0].local.step(z, false)?;
        if !z.is_finite() {
            return Err(DynError::NotInBasin(0));
        }
    }
    Err(DynError::NotInBasin(200_000))
}
