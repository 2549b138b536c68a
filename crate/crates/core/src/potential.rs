//! Double-well potentials and the one-dimensional heteroclinic front.
//!
//! A [`Potential`] is either the standard quartic `F(u) = (1 - u^2)^2 / 4` or a
//! tabulated even double well read from CSV. The heteroclinic profile `H` solves
//! `H'' = F'(H)` with `H(0) = 0`, `H(+-inf) = +-1`; it is built here by inverting
//! the first integral `s(H) = int_0^H dv / sqrt(2 F(v))` sample by sample.

use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};

/// Tabulated potentials may be queried up to this |u|; beyond it is a domain error.
pub const EXTENSION_LIMIT: f64 = 2.0;

const GL_NODES: [f64; 5] = [
    0.148_874_338_981_631_2,
    0.433_395_394_129_247_2,
    0.679_409_568_299_024_4,
    0.865_063_366_688_984_5,
    0.973_906_528_517_171_7,
];
const GL_WEIGHTS: [f64; 5] = [
    0.295_524_224_714_752_9,
    0.269_266_719_309_996_3,
    0.219_086_362_515_982,
    0.149_451_349_150_580_6,
    0.066_671_344_308_688_1,
];

/// Ten-point Gauss-Legendre rule on `[a, b]`.
pub(crate) fn gauss_legendre<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS.iter()) {
        acc += w * (f(mid - half * x) + f(mid + half * x));
    }
    acc * half
}

#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedPotential {
    u: Vec<f64>,
    f: Vec<f64>,
    df: Vec<f64>,
    ddf: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialKind {
    Quartic,
    Tabulated(TabulatedPotential),
}

/// An even double-well potential with wells at +-1.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    kind: PotentialKind,
}

impl Potential {
    pub fn quartic() -> Self {
        Potential {
            kind: PotentialKind::Quartic,
        }
    }

    /// Builds a tabulated potential from samples on `[-1, 1]`.
    ///
    /// Fails unless the samples describe an admissible double well: strictly
    /// increasing abscissae spanning `[-1, 1]`, `F` even, `F(+-1) = 0`, `F > 0`
    /// inside, `F''(+-1) > 0` and `F'` of one sign on `(0, 1)`.
    pub fn tabulated(u: Vec<f64>, f: Vec<f64>, df: Vec<f64>, ddf: Vec<f64>) -> Result<Self> {
        let len = u.len();
        if len < 5 || f.len() != len || df.len() != len || ddf.len() != len {
            return Err(Error::Construction(
                "tabulated potential needs at least 5 rows with u, F, dF, ddF".into(),
            ));
        }
        if u.iter()
            .chain(&f)
            .chain(&df)
            .chain(&ddf)
            .any(|v| !v.is_finite())
        {
            return Err(Error::Construction(
                "non-finite entry in potential table".into(),
            ));
        }
        if u.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Construction(
                "u column must be strictly increasing".into(),
            ));
        }
        if (u[0] + 1.0).abs() > 1e-12 || (u[len - 1] - 1.0).abs() > 1e-12 {
            return Err(Error::Construction(
                "u column must span exactly [-1, 1]".into(),
            ));
        }
        let mut f = f;
        for k in [0, len - 1] {
            if f[k].abs() > 1e-10 {
                return Err(Error::Construction(format!(
                    "F({}) = {} is not a well",
                    u[k], f[k]
                )));
            }
            f[k] = 0.0;
        }
        let table = TabulatedPotential { u, f, df, ddf };
        let p = Potential {
            kind: PotentialKind::Tabulated(table),
        };
        p.validate()?;
        Ok(p)
    }

    /// Reads a CSV with header `u,F,dF,ddF`.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| Error::Parse {
                line: 1,
                message: e.to_string(),
            })?
            .clone();
        let expected = ["u", "F", "dF", "ddF"];
        if headers.len() != 4 || headers.iter().zip(expected).any(|(h, e)| h != e) {
            return Err(Error::Parse {
                line: 1,
                message: "expected header u,F,dF,ddF".into(),
            });
        }
        let (mut u, mut f, mut df, mut ddf) = (vec![], vec![], vec![], vec![]);
        for (row, rec) in rdr.records().enumerate() {
            let line = row + 2;
            let rec = rec.map_err(|e| Error::Parse {
                line,
                message: e.to_string(),
            })?;
            let mut vals = [0.0; 4];
            for (k, v) in vals.iter_mut().enumerate() {
                let field = rec.get(k).ok_or_else(|| Error::Parse {
                    line,
                    message: format!("missing column {}", k + 1),
                })?;
                *v = field.parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("column {}: cannot parse {:?}", k + 1, field),
                })?;
            }
            u.push(vals[0]);
            f.push(vals[1]);
            df.push(vals[2]);
            ddf.push(vals[3]);
        }
        Self::tabulated(u, f, df, ddf)
    }

    pub fn from_csv_path(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::from_csv_reader(file)
    }

    pub fn kind(&self) -> &PotentialKind {
        &self.kind
    }

    /// Identifier written into solution files.
    pub fn id(&self) -> &'static str {
        match self.kind {
            PotentialKind::Quartic => "quartic",
            PotentialKind::Tabulated(_) => "tabulated",
        }
    }

    fn validate(&self) -> Result<()> {
        let lattice: Vec<f64> = (0..=400).map(|k| -1.0 + k as f64 / 200.0).collect();
        for &u in &lattice {
            let asym = (self.f(u) - self.f(-u)).abs();
            if asym > 1e-6 {
                return Err(Error::Construction(format!(
                    "F is not even at u = {u}: defect {asym:e}"
                )));
            }
            if u.abs() < 1.0 - 1e-12 && self.f(u) <= 0.0 {
                return Err(Error::Construction(format!("F(u) <= 0 at u = {u}")));
            }
        }
        if self.ddf(1.0) <= 0.0 || self.ddf(-1.0) <= 0.0 {
            return Err(Error::Construction("F''(+-1) must be positive".into()));
        }
        let interior: Vec<f64> = lattice
            .iter()
            .copied()
            .filter(|&u| u > 0.0 && u < 1.0)
            .collect();
        let sign = self.df(interior[0]).signum();
        if sign == 0.0 || interior.iter().any(|&u| self.df(u).signum() != sign) {
            return Err(Error::Construction(
                "F' vanishes or changes sign on (0, 1)".into(),
            ));
        }
        Ok(())
    }

    /// `F(u)`; total, extended quadratically outside `[-1, 1]` for tables.
    pub fn f(&self, u: f64) -> f64 {
        match &self.kind {
            PotentialKind::Quartic => {
                let w = (1.0 - u) * (1.0 + u);
                0.25 * w * w
            }
            PotentialKind::Tabulated(t) => t.eval(u).0,
        }
    }

    /// `F'(u)`.
    pub fn df(&self, u: f64) -> f64 {
        match &self.kind {
            PotentialKind::Quartic => -u * (1.0 - u) * (1.0 + u),
            PotentialKind::Tabulated(t) => t.eval(u).1,
        }
    }

    /// `F''(u)`.
    pub fn ddf(&self, u: f64) -> f64 {
        match &self.kind {
            PotentialKind::Quartic => 3.0 * u * u - 1.0,
            PotentialKind::Tabulated(t) => t.eval(u).2,
        }
    }

    fn check_domain(&self, u: f64) -> Result<()> {
        if !u.is_finite() {
            return Err(Error::Domain(format!(
                "potential queried at non-finite u = {u}"
            )));
        }
        if matches!(self.kind, PotentialKind::Tabulated(_)) && u.abs() > EXTENSION_LIMIT {
            return Err(Error::Domain(format!(
                "tabulated potential queried at u = {u}, outside [-{EXTENSION_LIMIT}, {EXTENSION_LIMIT}]"
            )));
        }
        Ok(())
    }

    pub fn eval_potential(&self, u: f64) -> Result<f64> {
        self.check_domain(u)?;
        Ok(self.f(u))
    }

    pub fn eval_dpotential(&self, u: f64) -> Result<f64> {
        self.check_domain(u)?;
        Ok(self.df(u))
    }

    pub fn eval_ddpotential(&self, u: f64) -> Result<f64> {
        self.check_domain(u)?;
        Ok(self.ddf(u))
    }

    /// `sqrt(F''(1))`, the exponential rate at which fronts saturate.
    pub fn well_rate(&self) -> f64 {
        self.ddf(1.0).sqrt()
    }

    /// Lower bound of `F''` on `[-1, 1]`.
    pub fn ddf_lower_bound(&self) -> f64 {
        (0..=2000)
            .map(|k| self.ddf(-1.0 + k as f64 / 1000.0))
            .fold(f64::INFINITY, f64::min)
    }
}

impl TabulatedPotential {
    /// Returns `(F, F', F'')`.
    fn eval(&self, u: f64) -> (f64, f64, f64) {
        let last = self.u.len() - 1;
        if !(-1.0..=1.0).contains(&u) {
            let (k, sign) = if u > 1.0 { (last, 1.0) } else { (0, -1.0) };
            let d = u - sign;
            let (f0, d0, dd0) = (self.f[k], self.df[k], self.ddf[k]);
            return (f0 + d0 * d + 0.5 * dd0 * d * d, d0 + dd0 * d, dd0);
        }
        let k = match self.u.binary_search_by(|x| x.partial_cmp(&u).unwrap()) {
            Ok(k) => k.min(last - 1),
            Err(k) => k.saturating_sub(1).min(last - 1),
        };
        let (u0, u1) = (self.u[k], self.u[k + 1]);
        let w = u1 - u0;
        // both local coordinates are formed directly so values near a well keep relative precision
        let (t, s) = ((u - u0) / w, (u1 - u) / w);
        let f = hermite(
            t,
            s,
            w,
            self.f[k],
            self.df[k],
            self.f[k + 1],
            self.df[k + 1],
        );
        let df = hermite(
            t,
            s,
            w,
            self.df[k],
            self.ddf[k],
            self.df[k + 1],
            self.ddf[k + 1],
        );
        let ddf = s * self.ddf[k] + t * self.ddf[k + 1];
        (f, df, ddf)
    }
}

/// Cubic Hermite interpolant in factored form, `s = 1 - t`.
fn hermite(t: f64, s: f64, w: f64, y0: f64, m0: f64, y1: f64, m1: f64) -> f64 {
    s * s * ((1.0 + 2.0 * t) * y0 + t * w * m0) + t * t * ((1.0 + 2.0 * s) * y1 - s * w * m1)
}

/// Samples of the odd heteroclinic `H` and `H'` on `s = k * ds`, `0 <= k <= N`.
///
/// Negative arguments are served by oddness; beyond `S = N * ds` the exact
/// exponential tail `1 - H ~ e^{-sqrt(F''(1)) s}` is used.
#[derive(Debug, Clone)]
pub struct HeteroclinicProfile {
    ds: f64,
    h: Vec<f64>,
    dh: Vec<f64>,
    decay_rate: f64,
}

pub const DEFAULT_PROFILE_HALF_WIDTH: f64 = 20.0;
pub const DEFAULT_PROFILE_SPACING: f64 = 0.005;

/// Builds `H` by monotone inversion of `s(H) = int_0^H dv / sqrt(2F(v))`.
pub fn build_heteroclinic(p: &Potential, half_width: f64, ds: f64) -> Result<HeteroclinicProfile> {
    if !(half_width >= 10.0) {
        return Err(Error::Domain(format!(
            "profile half-width {half_width} < 10"
        )));
    }
    if !(ds > 0.0 && ds <= 0.01) {
        return Err(Error::Domain(format!(
            "profile spacing {ds} outside (0, 0.01]"
        )));
    }
    let mut n = (half_width / ds).round() as usize;
    if n % 2 == 1 {
        n += 1;
    }
    let speed = |v: f64| (2.0 * p.f(v)).max(0.0).sqrt();
    let mut h = Vec::with_capacity(n + 1);
    h.push(0.0);
    for k in 1..=n {
        let prev = h[k - 1];
        // explicit Euler overshoots on the concave branch, so Newton descends monotonically
        let mut cur = prev + ds * speed(prev);
        if !(cur < 1.0) {
            cur = 0.5 * (prev + 1.0);
        }
        let mut converged = false;
        for _ in 0..60 {
            let g = gauss_legendre(|v| 1.0 / speed(v), prev, cur) - ds;
            let step = g * speed(cur);
            let mut next = cur - step;
            if next <= prev {
                next = 0.5 * (prev + cur);
            }
            if next >= 1.0 {
                next = 0.5 * (cur + 1.0);
            }
            let done = (next - cur).abs() <= 4.0 * f64::EPSILON * next.abs().max(1e-300);
            cur = next;
            if done || g.abs() < 1e-16 {
                converged = true;
                break;
            }
        }
        if !converged || !cur.is_finite() || cur >= 1.0 || cur <= prev {
            return Err(Error::Construction(format!(
                "first-integral inversion failed at s = {}",
                k as f64 * ds
            )));
        }
        h.push(cur);
    }
    let dh = h.iter().map(|&v| speed(v)).collect();
    Ok(HeteroclinicProfile {
        ds,
        h,
        dh,
        decay_rate: p.well_rate(),
    })
}

impl HeteroclinicProfile {
    pub fn spacing(&self) -> f64 {
        self.ds
    }

    pub fn half_width(&self) -> f64 {
        (self.h.len() - 1) as f64 * self.ds
    }

    pub fn decay_rate(&self) -> f64 {
        self.decay_rate
    }

    /// Nonnegative-side samples `(s, H, H')`.
    pub fn samples(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.h
            .iter()
            .zip(&self.dh)
            .enumerate()
            .map(move |(k, (&h, &dh))| (k as f64 * self.ds, h, dh))
    }

    /// All samples on the symmetric interval `[-S, S]`, ascending in `s`.
    pub fn symmetric_samples(&self) -> Vec<(f64, f64, f64)> {
        let n = self.h.len() - 1;
        let mut out = Vec::with_capacity(2 * n + 1);
        for k in (1..=n).rev() {
            out.push((-(k as f64) * self.ds, -self.h[k], self.dh[k]));
        }
        out.extend(self.samples());
        out
    }

    /// `(H(s), H'(s))`.
    pub fn eval_with_derivative(&self, s: f64) -> (f64, f64) {
        let a = s.abs();
        let sign = if s < 0.0 { -1.0 } else { 1.0 };
        let n = self.h.len() - 1;
        let x = a / self.ds;
        if x >= n as f64 {
            let gap = 1.0 - self.h[n];
            let decay = (-self.decay_rate * (a - n as f64 * self.ds)).exp();
            return (sign * (1.0 - gap * decay), self.decay_rate * gap * decay);
        }
        let k = x.floor() as usize;
        let t = x - k as f64;
        let w = self.ds;
        let (y0, m0, y1, m1) = (self.h[k], self.dh[k], self.h[k + 1], self.dh[k + 1]);
        let val = hermite(t, 1.0 - t, w, y0, m0, y1, m1);
        let t2 = t * t;
        let der = (6.0 * t2 - 6.0 * t) / w * y0
            + (3.0 * t2 - 4.0 * t + 1.0) * m0
            + (-6.0 * t2 + 6.0 * t) / w * y1
            + (3.0 * t2 - 2.0 * t) * m1;
        (sign * val, der)
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.eval_with_derivative(s).0
    }

    /// Largest `|H'^2 / 2 - F(H)|` over the samples.
    pub fn equipartition_defect(&self, p: &Potential) -> f64 {
        self.h
            .iter()
            .zip(&self.dh)
            .map(|(&h, &dh)| (0.5 * dh * dh - p.f(h)).abs())
            .fold(0.0, f64::max)
    }

    /// Fourth-order finite-difference derivative of the `H` samples.
    fn differentiated(&self) -> Vec<f64> {
        let n = self.h.len() - 1;
        let hh = |k: isize| -> f64 {
            if k < 0 {
                -self.h[(-k) as usize]
            } else {
                self.h[k as usize]
            }
        };
        let ds = self.ds;
        (0..=n)
            .map(|k| {
                let k = k as isize;
                if k + 2 <= n as isize {
                    (hh(k - 2) - 8.0 * hh(k - 1) + 8.0 * hh(k + 1) - hh(k + 2)) / (12.0 * ds)
                } else {
                    (25.0 * hh(k) - 48.0 * hh(k - 1) + 36.0 * hh(k - 2) - 16.0 * hh(k - 3)
                        + 3.0 * hh(k - 4))
                        / (12.0 * ds)
                }
            })
            .collect()
    }
}

/// Both quadratures of the front energy and their agreement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyConstant {
    /// `int (H'^2 / 2 + F(H)) ds`.
    pub value: f64,
    /// `int (H')^2 ds` with `H'` differentiated from the `H` samples.
    pub kinetic_route: f64,
    /// Analytic bound on the truncated tails, included in both values.
    pub tail: f64,
}

pub const ENERGY_ROUTE_TOLERANCE: f64 = 1e-8;

/// Simpson rule over the nonnegative samples, doubled by symmetry.
fn simpson_even(values: &[f64], ds: f64) -> f64 {
    let n = values.len() - 1;
    debug_assert!(n.is_multiple_of(2));
    let mut acc = values[0] + values[n];
    for (k, v) in values.iter().enumerate().take(n).skip(1) {
        acc += if k % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    2.0 * acc * ds / 3.0
}

/// `c0` from an existing profile; errors if the two routes disagree beyond 1e-8.
pub fn energy_constant_from_profile(
    p: &Potential,
    profile: &HeteroclinicProfile,
) -> Result<EnergyConstant> {
    let n = profile.h.len() - 1;
    let energy: Vec<f64> = profile
        .h
        .iter()
        .zip(&profile.dh)
        .map(|(&h, &dh)| 0.5 * dh * dh + p.f(h))
        .collect();
    let fd = profile.differentiated();
    let kinetic: Vec<f64> = fd.iter().map(|d| d * d).collect();
    let gap = 1.0 - profile.h[n];
    let tail = profile.decay_rate * gap * gap;
    let value = simpson_even(&energy, profile.ds) + tail;
    let kinetic_route = simpson_even(&kinetic, profile.ds) + tail;
    if !(value > 0.0) || (value - kinetic_route).abs() > ENERGY_ROUTE_TOLERANCE {
        return Err(Error::Accuracy(format!(
            "energy quadratures disagree: {value} vs {kinetic_route}"
        )));
    }
    Ok(EnergyConstant {
        value,
        kinetic_route,
        tail,
    })
}

/// `c0 = int (H'^2/2 + F(H)) ds` using the default profile resolution.
pub fn energy_constant(p: &Potential) -> Result<EnergyConstant> {
    let profile = build_heteroclinic(p, DEFAULT_PROFILE_HALF_WIDTH, DEFAULT_PROFILE_SPACING)?;
    energy_constant_from_profile(p, &profile)
}

/// A potential together with its front profile and energy constant.
#[derive(Debug, Clone)]
pub struct Model {
    pub potential: Potential,
    pub profile: HeteroclinicProfile,
    pub c0: f64,
}

impl Model {
    pub fn new(potential: Potential) -> Result<Self> {
        let profile = build_heteroclinic(
            &potential,
            DEFAULT_PROFILE_HALF_WIDTH,
            DEFAULT_PROFILE_SPACING,
        )?;
        let c0 = energy_constant_from_profile(&potential, &profile)?.value;
        Ok(Model {
            potential,
            profile,
            c0,
        })
    }

    pub fn quartic() -> Self {
        Self::new(Potential::quartic()).expect("quartic model is admissible")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn quartic_values() {
        let p = Potential::quartic();
        assert_eq!(p.f(1.0), 0.0);
        assert_eq!(p.df(1.0), 0.0);
        assert_eq!(p.ddf(1.0), 2.0);
        assert_eq!(p.f(0.0), 0.25);
        assert_eq!(p.df(0.0), 0.0);
        assert_eq!(p.ddf(0.0), -1.0);
        assert_eq!(p.f(-0.3), p.f(0.3));
        assert_eq!(p.eval_potential(5.0).unwrap(), p.f(5.0));
    }

    #[test]
    fn quartic_profile_is_tanh() {
        let p = Potential::quartic();
        let prof = build_heteroclinic(&p, 10.0, 0.01).unwrap();
        assert_eq!(prof.eval(0.0), 0.0);
        assert_abs_diff_eq!(prof.eval(1.0), (1.0 / 2f64.sqrt()).tanh(), epsilon = 1e-10);
        assert!(1.0 - prof.eval(8.0) <= 2.0 * (-(2f64.sqrt()) * 8.0).exp());
        assert!(prof.equipartition_defect(&p) <= 1e-10);
        let mut last = -1.0;
        for (s, h, _) in prof.symmetric_samples() {
            assert!(h > last && h.abs() < 1.0);
            assert_abs_diff_eq!(h, (s / 2f64.sqrt()).tanh(), epsilon = 1e-8);
            last = h;
        }
    }

    #[test]
    fn stored_derivative_matches_differentiated_samples() {
        let p = Potential::quartic();
        let prof = build_heteroclinic(&p, 12.0, 0.005).unwrap();
        let fd = prof.differentiated();
        for (a, (_, _, b)) in fd.iter().zip(prof.samples()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn quartic_energy_constant() {
        let c = energy_constant(&Potential::quartic()).unwrap();
        assert_abs_diff_eq!(c.value, 2.0 * 2f64.sqrt() / 3.0, epsilon = 1e-9);
        assert!((c.value - c.kinetic_route).abs() <= 1e-8);
        // integrand at the centre: H'(0)^2/2 + F(0)
        let prof = build_heteroclinic(&Potential::quartic(), 10.0, 0.01).unwrap();
        let (h, dh) = prof.eval_with_derivative(0.0);
        assert_abs_diff_eq!(
            0.5 * dh * dh + Potential::quartic().f(h),
            0.5,
            epsilon = 1e-14
        );
    }

    #[test]
    fn profile_arguments_checked() {
        let p = Potential::quartic();
        assert!(matches!(
            build_heteroclinic(&p, 5.0, 0.01),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            build_heteroclinic(&p, 10.0, 0.05),
            Err(Error::Domain(_))
        ));
    }

    fn quartic_table(rows: usize) -> String {
        let mut s = String::from("u,F,dF,ddF\n");
        let q = Potential::quartic();
        for k in 0..rows {
            let u = -1.0 + 2.0 * k as f64 / (rows - 1) as f64;
            s.push_str(&format!("{u},{},{},{}\n", q.f(u), q.df(u), q.ddf(u)));
        }
        s
    }

    #[test]
    fn tabulated_quartic_reproduces_closed_form() {
        let p = Potential::from_csv_reader(quartic_table(401).as_bytes()).unwrap();
        for k in 0..100 {
            let u = -1.0 + 0.0193 * k as f64;
            assert!((p.f(u) - Potential::quartic().f(u)).abs() < 1e-9);
            assert!((p.df(u) - Potential::quartic().df(u)).abs() < 1e-6);
        }
        // quadratic extension past the wells
        assert_abs_diff_eq!(p.ddf(1.3), 2.0, epsilon = 1e-12);
        assert!(p.eval_potential(1.5).is_ok());
        assert!(matches!(p.eval_potential(3.0), Err(Error::Domain(_))));
        let prof = build_heteroclinic(&p, 10.0, 0.01).unwrap();
        assert!((prof.eval(1.0) - (1.0 / 2f64.sqrt()).tanh()).abs() < 1e-5);
        let c = energy_constant(&p).unwrap();
        assert!((c.value - 2.0 * 2f64.sqrt() / 3.0).abs() < 1e-6);
    }

    #[test]
    fn tabulated_rejects_bad_tables() {
        let bad_header = "x,F,dF,ddF\n-1,0,0,2\n";
        assert!(matches!(
            Potential::from_csv_reader(bad_header.as_bytes()),
            Err(Error::Parse { line: 1, .. })
        ));
        let bad_number = quartic_table(11).replace("0.25,", "abc,");
        assert!(matches!(
            Potential::from_csv_reader(bad_number.as_bytes()),
            Err(Error::Parse { line: 7, .. })
        ));
        // a single well is not admissible
        let mut s = String::from("u,F,dF,ddF\n");
        for k in 0..11 {
            let u = -1.0 + 0.2 * k as f64;
            s.push_str(&format!(
                "{u},{},{},{}\n",
                (u + 1.0).powi(2),
                2.0 * (u + 1.0),
                2.0
            ));
        }
        assert!(matches!(
            Potential::from_csv_reader(s.as_bytes()),
            Err(Error::Construction(_))
        ));
    }
}
