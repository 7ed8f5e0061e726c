//! Orthogonality of the momentum-space Clebsch-Gordan kernels and the Haar functionals
//! on kernel-represented operators.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

use super::cgc::{cgc_prefactor, flip_label, CgcParams};
use crate::error::{Error, Result};
use crate::modulus::Modulus;
use crate::quadrature::gauss_legendre;
use crate::specfun::log_wb;

/// Plancherel density 4 sinh(2 pi b s) sinh(2 pi s / b).
pub fn plancherel_density(s: f64, m: &Modulus) -> f64 {
    let b = m.b_re();
    4.0 * (2.0 * PI * b * s).sinh() * (2.0 * PI * s / b).sinh()
}

/// exp(-((k - c)/w)^2).
pub fn gaussian(c: f64, w: f64) -> impl Fn(f64) -> f64 {
    move |k| (-((k - c) / w).powi(2)).exp()
}

/// Smooth bump supported on (c - r, c + r).
pub fn bump(c: f64, r: f64) -> impl Fn(f64) -> f64 {
    move |k| {
        let u = (k - c) / r;
        if u.abs() < 1.0 {
            (1.0 - 1.0 / (1.0 - u * u)).exp()
        } else {
            0.0
        }
    }
}

/// The four real test functions of the smeared identity.
pub struct TestFns<'a> {
    pub f3: &'a (dyn Fn(f64) -> f64 + Sync),
    pub f3p: &'a (dyn Fn(f64) -> f64 + Sync),
    pub f2: &'a (dyn Fn(f64) -> f64 + Sync),
    pub f2p: &'a (dyn Fn(f64) -> f64 + Sync),
}

/// Discretization of the smeared identity.
///
/// The s integral of each kernel runs on the line Im s = -Q/4 with step `line_step`; momenta
/// live on the grid `k_mult * line_step` Z truncated to |k| <= `k_max` (k1 to twice that).
/// The s1 integral uses composite Simpson on [0, `s1_max`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrthoGrid {
    pub line_step: f64,
    pub k_mult: usize,
    pub k_max: f64,
    pub s1_max: f64,
    pub s1_panels: usize,
    pub line_window: f64,
}

impl OrthoGrid {
    pub fn coarse() -> Self {
        OrthoGrid { line_step: 0.1, k_mult: 2, k_max: 3.0, s1_max: 3.0, s1_panels: 30, line_window: 16.0 }
    }

    /// Halves the momentum and s1 steps.
    pub fn refined(&self) -> Self {
        let mut g = self.clone();
        if g.k_mult % 2 == 0 {
            g.k_mult /= 2;
        } else {
            g.line_step /= 2.0;
        }
        g.s1_panels *= 2;
        g
    }

    pub fn dk(&self) -> f64 {
        self.k_mult as f64 * self.line_step
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OrthoResult {
    pub lhs: Complex64,
    pub rhs: f64,
    pub residual: f64,
    /// |integrand| at s1_max over its maximum.
    pub s1_tail: f64,
    /// (s1, integrand) on the Simpson nodes.
    pub profile: Vec<(f64, Complex64)>,
}

/// log w_b on the points n h + i y + x0 for n in [lo, hi].
struct LineTable {
    lo: i64,
    vals: Vec<Complex64>,
}

impl LineTable {
    fn new(x0: f64, y: f64, h: f64, lo: i64, hi: i64, m: &Modulus) -> Result<Self> {
        let vals = (lo..=hi).map(|n| log_wb(Complex64::new(x0 + n as f64 * h, y), m).map(|v| v.value)).collect::<Result<_>>()?;
        Ok(LineTable { lo, vals })
    }

    fn at(&self, n: i64) -> Complex64 {
        self.vals[(n - self.lo) as usize]
    }
}

struct Layout {
    h: f64,
    mult: i64,
    kn: i64,
    jn: i64,
    c: f64,
}

/// Tables of the reduced kernel (left label s3) on the momentum grid at one value of s1.
/// Entry [a][b] is k1 = a dk (a in [-2kn, 2kn]), k2 = b dk (b in [-kn, kn]); `None` where both
/// weights vanish.
struct KernelSlice {
    vals: Vec<Vec<Option<Complex64>>>,
    edge: f64,
}

#[allow(clippy::too_many_arguments)]
fn kernel_slice(s1: f64, s2: f64, s3f: f64, lay: &Layout, need: &[Vec<bool>], fixed: &[LineTable; 3], m: &Modulus) -> Result<KernelSlice> {
    let q = m.qq().re;
    let (h, mm, kn, jn, c) = (lay.h, lay.mult, lay.kn, lay.jn, lay.c);
    let p = CgcParams::new(s3f, s2, s1, m);
    let span = jn + 2 * kn * mm;
    // w_b(s + R_1) and w_b(s + S_0) depend on s1
    let r1 = LineTable::new(-s1, c, h, -span, span, m)?;
    let s0 = LineTable::new(-s1 + s3f, c + q / 2.0, h, -span, span, m)?;
    let r2 = LineTable::new(s3f - s2 - s1, c, h, -jn, jn, m)?;
    let [r0, s1t, s2t] = fixed;
    let beta = p.beta;
    let lin: Vec<Complex64> = (-jn..=jn).map(|j| -PI * Complex64::new(j as f64 * h, c) * beta + r2.at(j) - s2t.at(j)).collect();
    let dk = lay.h * mm as f64;
    let mut edge: f64 = 0.0;
    let mut vals = Vec::with_capacity(need.len());
    for (ia, row) in need.iter().enumerate() {
        let a = ia as i64 - 2 * kn;
        let mut out = Vec::with_capacity(row.len());
        for (ib, &want) in row.iter().enumerate() {
            if !want {
                out.push(None);
                continue;
            }
            let b = ib as i64 - kn;
            let (k2, k1) = (Complex64::from(b as f64 * dk), Complex64::from(a as f64 * dk));
            let mut sum = Complex64::new(0.0, 0.0);
            let (mut peak, mut ends): (f64, f64) = (0.0, 0.0);
            for (ij, l) in lin.iter().enumerate() {
                let j = ij as i64 - jn;
                let v = (l + r0.at(j + b * mm) + r1.at(j - a * mm) - s0.at(j + b * mm) - s1t.at(j - a * mm)).exp();
                let n = v.norm();
                peak = peak.max(n);
                if j.abs() == jn {
                    ends = ends.max(n);
                }
                sum += v;
            }
            if peak > 0.0 {
                edge = edge.max(ends / peak);
            }
            out.push(Some(cgc_prefactor(&p, k2, k1, m)? * sum * h));
        }
        vals.push(out);
    }
    Ok(KernelSlice { vals, edge })
}

/// Smears both sides of the orthogonality identity
/// e^{2 pi Q k3} int dm(s1) dk1 e^{-2 pi Q k1} conj C(s3|k3; s2,k2; s1,k1) C(s3|k3'; s2,k2'; s1,k1)
/// = delta(k3' - k3) delta(k2' - k2) against f3(k3) f2(k2) f3'(k3') f2'(k2').
///
/// The kernel is the reduced momentum kernel with left label s3 times delta(k3 - k2 - k1).
/// The residual is |LHS - RHS| / |RHS|, or |LHS| / (||f3|| ||f3'|| ||f2|| ||f2'||) when the
/// right side vanishes on the grid.
pub fn orthogonality_terms(f: &TestFns, s2: f64, s3: f64, grid: &OrthoGrid, m: &Modulus) -> Result<OrthoResult> {
    if !m.is_real() {
        return Err(Error::WrongRegime);
    }
    if grid.k_mult == 0 || grid.s1_panels == 0 || grid.line_step <= 0.0 {
        return Err(Error::ConfigInvalid("empty orthogonality grid".into()));
    }
    let q = m.qq().re;
    let dk = grid.dk();
    let kn = (grid.k_max / dk).round() as i64;
    let mm = grid.k_mult as i64;
    let reach = grid.line_window + 2.0 * grid.k_max + grid.s1_max + s2.abs() + s3.abs();
    let lay = Layout { h: grid.line_step, mult: mm, kn, jn: (reach / grid.line_step).ceil() as i64, c: -q / 4.0 };
    let s3f = flip_label(s3);
    let ks: Vec<f64> = (-kn..=kn).map(|b| b as f64 * dk).collect();
    let (f3, f3p, f2, f2p) = (f.f3, f.f3p, f.f2, f.f2p);
    // weights of U and V: f3(k1 + k2) f2(k2) e^{2 pi Q k2} and f3'(k1 + k2) f2'(k2)
    let wts: Vec<Vec<(f64, f64)>> = (-2 * kn..=2 * kn)
        .map(|a| {
            let k1 = a as f64 * dk;
            ks.iter().map(|&k2| (f3(k1 + k2) * f2(k2) * (2.0 * PI * q * k2).exp(), f3p(k1 + k2) * f2p(k2))).collect()
        })
        .collect();
    let need: Vec<Vec<bool>> = wts.iter().map(|r| r.iter().map(|&(u, v)| u != 0.0 || v != 0.0).collect()).collect();
    let span = lay.jn + 2 * kn * mm;
    let fixed = [
        LineTable::new(-s2, lay.c, lay.h, -span, span, m)?,
        LineTable::new(-s2 + s3f, lay.c + q / 2.0, lay.h, -span, span, m)?,
        LineTable::new(0.0, lay.c + q / 2.0, lay.h, -lay.jn, lay.jn, m)?,
    ];
    let n = 2 * grid.s1_panels;
    let hs = grid.s1_max / n as f64;
    let nodes: Vec<f64> = (0..=n).map(|i| i as f64 * hs).collect();
    let rows: Vec<Result<(Complex64, f64)>> = nodes
        .par_iter()
        .map(|&s1| {
            if s1 == 0.0 {
                return Ok((Complex64::new(0.0, 0.0), 0.0));
            }
            let sl = kernel_slice(s1, s2, s3f, &lay, &need, &fixed, m)?;
            let mut acc = Complex64::new(0.0, 0.0);
            for (row, w) in sl.vals.iter().zip(&wts) {
                let (mut u, mut v) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
                for (r, &(wu, wv)) in row.iter().zip(w) {
                    if let Some(r) = r {
                        u += wu * r;
                        v += wv * r;
                    }
                }
                acc += u.conj() * v;
            }
            Ok((acc * dk * dk * dk * plancherel_density(s1, m), sl.edge))
        })
        .collect();
    let mut profile = Vec::with_capacity(n + 1);
    let mut edge: f64 = 0.0;
    for (s1, r) in nodes.iter().zip(rows) {
        let (v, e) = r?;
        edge = edge.max(e);
        profile.push((*s1, v));
    }
    if edge > 1e-12 {
        return Err(Error::GridTooCoarse(format!("s line window: edge/peak {edge:e}")));
    }
    let mut lhs = Complex64::new(0.0, 0.0);
    for (i, (_, v)) in profile.iter().enumerate() {
        let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
        lhs += w * v;
    }
    lhs *= hs / 3.0;
    let peak = profile.iter().map(|(_, v)| v.norm()).fold(0.0, f64::max);
    let s1_tail = if peak > 0.0 { profile[n].1.norm() / peak } else { 0.0 };
    let dot = |a: &dyn Fn(f64) -> f64, b: &dyn Fn(f64) -> f64, r: i64| (-r..=r).map(|i| a(i as f64 * dk) * b(i as f64 * dk)).sum::<f64>() * dk;
    let rhs = dot(f3, f3p, 2 * kn) * dot(f2, f2p, kn);
    let scale = (dot(f3, f3, 2 * kn) * dot(f3p, f3p, 2 * kn) * dot(f2, f2, kn) * dot(f2p, f2p, kn)).sqrt();
    let residual = if rhs.abs() > 1e-12 * scale { (lhs - rhs).norm() / rhs.abs() } else { lhs.norm() / scale };
    Ok(OrthoResult { lhs, rhs, residual, s1_tail, profile })
}

/// Residual of the smeared orthogonality identity; errors if the s1 integrand at the cutoff
/// exceeds 1e-4 of its peak.
pub fn orthogonality_residual(f: &TestFns, s2: f64, s3: f64, grid: &OrthoGrid, m: &Modulus) -> Result<f64> {
    let r = orthogonality_terms(f, s2, s3, grid, m)?;
    if r.s1_tail > 1e-4 {
        return Err(Error::GridTooCoarse(format!("s1 integrand at the cutoff is {:e} of its peak", r.s1_tail)));
    }
    Ok(r.residual)
}

/// Left or right Haar functional.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum HaarSide {
    Left,
    Right,
}

/// int dm(s) int dk e^{-+2 pi Q k} K(k, k | s) over s in `s_window`, upper sign for the left
/// functional. The s integral uses 16-point Gauss-Legendre panels of width at most 0.5; the k
/// integral is a trapezoid rule with step `k_step`, widened until the weighted diagonal
/// decays to 1e-17 of its peak (up to |k| = 200).
pub fn haar<K>(side: HaarSide, kernel: &K, s_window: (f64, f64), k_step: f64, m: &Modulus) -> Result<Complex64>
where
    K: Fn(f64, f64, f64) -> Complex64 + Sync,
{
    let (lo, hi) = s_window;
    if !(hi > lo && lo >= 0.0 && k_step > 0.0) {
        return Err(Error::ConfigInvalid("haar needs 0 <= s_lo < s_hi and k_step > 0".into()));
    }
    let q = m.qq().re;
    let sg = if side == HaarSide::Left { -1.0 } else { 1.0 };
    let diag = |s: f64| -> Result<Complex64> {
        let f = |k: f64| (sg * 2.0 * PI * q * k).exp() * kernel(k, k, s);
        let mut half = 8.0;
        loop {
            let n = (half / k_step).ceil() as i64;
            let mut sum = Complex64::new(0.0, 0.0);
            let (mut peak, mut ends): (f64, f64) = (0.0, 0.0);
            for j in -n..=n {
                let v = f(j as f64 * k_step);
                peak = peak.max(v.norm());
                if j.abs() == n {
                    ends = ends.max(v.norm());
                }
                sum += v;
            }
            if !sum.re.is_finite() || !sum.im.is_finite() {
                return Err(Error::NonConvergent("weighted kernel overflows".into()));
            }
            if ends <= 1e-17 * peak || peak == 0.0 {
                return Ok(sum * k_step);
            }
            half *= 1.5;
            if half > 200.0 {
                return Err(Error::NonConvergent(format!("kernel does not decay against e^{{{}2 pi Q k}}", if sg > 0.0 { "+" } else { "-" })));
            }
        }
    };
    let panels = ((hi - lo) / 0.5).ceil() as usize;
    let (x, w) = gauss_legendre(16);
    let hp = (hi - lo) / panels as f64;
    let pts: Vec<(f64, f64)> = (0..panels)
        .flat_map(|p| {
            let a = lo + p as f64 * hp;
            x.iter().zip(&w).map(move |(xi, wi)| (a + 0.5 * hp * (xi + 1.0), 0.5 * hp * wi)).collect::<Vec<_>>()
        })
        .collect();
    let vals: Vec<Result<Complex64>> = pts.par_iter().map(|&(s, wt)| diag(s).map(|d| d * wt * plancherel_density(s, m))).collect();
    let mut acc = Complex64::new(0.0, 0.0);
    for v in vals {
        acc += v?;
    }
    Ok(acc)
}

/// Closed form of the left functional on K = e^{-k^2 - k'^2 - s^2} over s in [0, inf).
pub fn haar_gaussian_reference(m: &Modulus) -> f64 {
    let b = m.b_re();
    let q = m.qq().re;
    let k_part = (PI / 2.0).sqrt() * ((PI * q).powi(2) / 2.0).exp();
    let s_part = PI.sqrt() * (((PI * q).powi(2)).exp() - ((PI * (b - 1.0 / b)).powi(2)).exp());
    k_part * s_part
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::cgc::{cgc_momentum_labeled, CgcContour};

    #[test]
    fn slices_match_the_direct_kernel() {
        let m = Modulus::real(0.75).unwrap();
        let q = m.qq().re;
        let grid = OrthoGrid { k_max: 1.0, ..OrthoGrid::coarse() };
        let dk = grid.dk();
        let kn = (grid.k_max / dk).round() as i64;
        let (s1, s2, s3) = (0.45, 0.4, 0.6);
        let reach = grid.line_window + 2.0 * grid.k_max + grid.s1_max + 1.0;
        let lay = Layout { h: grid.line_step, mult: grid.k_mult as i64, kn, jn: (reach / grid.line_step).ceil() as i64, c: -q / 4.0 };
        let need = vec![vec![true; (2 * kn + 1) as usize]; (4 * kn + 1) as usize];
        let span = lay.jn + 2 * kn * lay.mult;
        let s3f = flip_label(s3);
        let fixed = [
            LineTable::new(-s2, lay.c, lay.h, -span, span, &m).unwrap(),
            LineTable::new(-s2 + s3f, lay.c + q / 2.0, lay.h, -span, span, &m).unwrap(),
            LineTable::new(0.0, lay.c + q / 2.0, lay.h, -lay.jn, lay.jn, &m).unwrap(),
        ];
        let sl = kernel_slice(s1, s2, s3f, &lay, &need, &fixed, &m).unwrap();
        assert!(sl.edge < 1e-12);
        for (a, b) in [(0i64, 0i64), (3, -2), (-7, 4), (10, 5)] {
            let (k1, k2) = (a as f64 * dk, b as f64 * dk);
            let t = sl.vals[(a + 2 * kn) as usize][(b + kn) as usize].unwrap();
            let d = cgc_momentum_labeled(s3, s2, k2.into(), s1, k1.into(), CgcContour::Separating, &m).unwrap();
            assert!((t - d).norm() < 1e-9 * d.norm(), "{a} {b}: {t} {d}");
        }
    }

    #[test]
    fn haar_matches_gaussian_closed_form() {
        let m = Modulus::real(0.75).unwrap();
        let k = |k: f64, kp: f64, s: f64| Complex64::from((-k * k - kp * kp - s * s).exp());
        let v = haar(HaarSide::Left, &k, (0.0, 16.0), 0.05, &m).unwrap();
        let r = haar_gaussian_reference(&m);
        assert!((v - r).norm() < 1e-10 * r, "{v} {r}");
    }

    #[test]
    fn haar_sides_are_related_by_reflection() {
        let m = Modulus::real(0.7).unwrap();
        let k = |k: f64, kp: f64, s: f64| Complex64::new(0.3 * k, 1.0 + kp).exp() * (-(k - 0.4).powi(2) - kp * kp - (s - 1.0).powi(2)).exp();
        let kr = |a: f64, b: f64, s: f64| k(-a, -b, s);
        let l = haar(HaarSide::Left, &k, (0.0, 3.0), 0.05, &m).unwrap();
        let r = haar(HaarSide::Right, &kr, (0.0, 3.0), 0.05, &m).unwrap();
        assert!((l - r).norm() < 1e-12 * l.norm());
    }

    #[test]
    fn haar_rejects_slow_decay() {
        let m = Modulus::real(0.7).unwrap();
        let k = |k: f64, _: f64, _: f64| Complex64::from((-k.abs()).exp());
        assert!(matches!(haar(HaarSide::Left, &k, (0.0, 1.0), 0.1, &m), Err(Error::NonConvergent(_))));
    }

    #[test]
    fn density_is_even_in_b() {
        let a = Modulus::real(0.7).unwrap();
        let b = Modulus::real(1.0 / 0.7).unwrap();
        assert!((plancherel_density(0.8, &a) - plancherel_density(0.8, &b)).abs() < 1e-9 * plancherel_density(0.8, &a));
        assert_eq!(plancherel_density(0.0, &a), 0.0);
    }

    fn small_grid() -> OrthoGrid {
        OrthoGrid { k_max: 2.0, s1_panels: 15, ..OrthoGrid::coarse() }
    }

    #[test]
    fn orthogonality_with_disjoint_supports() {
        let m = Modulus::real(0.75).unwrap();
        let (a, b, c) = (bump(-1.0, 0.7), bump(1.0, 0.7), bump(0.0, 0.6));
        let f = TestFns { f3: &a, f3p: &b, f2: &c, f2p: &c };
        let r = orthogonality_terms(&f, 0.4, 0.6, &small_grid(), &m).unwrap();
        assert_eq!(r.rhs, 0.0);
        assert!(r.residual < 1e-5, "{}", r.residual);
    }

    #[test]
    fn orthogonality_is_dual_invariant() {
        let (g3, g2) = (gaussian(0.1, 0.5), gaussian(-0.1, 0.45));
        let f = TestFns { f3: &g3, f3p: &g3, f2: &g2, f2p: &g2 };
        let a = orthogonality_terms(&f, 0.4, 0.6, &small_grid(), &Modulus::real(0.75).unwrap()).unwrap();
        let b = orthogonality_terms(&f, 0.4, 0.6, &small_grid(), &Modulus::real(1.0 / 0.75).unwrap()).unwrap();
        assert!((a.lhs - b.lhs).norm() < 1e-8 * a.lhs.norm());
        assert!(a.residual < 1e-3, "{}", a.residual);
    }
}
