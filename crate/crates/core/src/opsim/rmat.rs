//! Multi-particle lattices: co-product, the R-operator and its algebraic properties.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

use super::efk::{build_efk_s, max_residual, Efk};
use super::funcs::{real_power, HermEig};
use super::grid::{diff_norm, norm, normalize, CMat, CVec, Grid};
use crate::error::{Error, Result};
use crate::modulus::Modulus;
use crate::specfun::{gb_pos, log_wb};

/// Tensor power of one grid. Slot 0 is the leftmost tensor factor and the slowest index.
#[derive(Clone, Debug)]
pub struct Multi {
    pub grid: Grid,
    pub slots: usize,
}

impl Multi {
    pub fn new(grid: &Grid, slots: usize) -> Self {
        Multi { grid: grid.clone(), slots }
    }

    pub fn len(&self) -> usize {
        self.grid.n.pow(self.slots as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn stride(&self, slot: usize) -> usize {
        self.grid.n.pow((self.slots - 1 - slot) as u32)
    }

    /// Apply a one-particle map to every fiber along `slot`.
    pub fn map_slot<F: Fn(&[Complex64]) -> CVec>(&self, slot: usize, psi: &[Complex64], f: F) -> CVec {
        let n = self.grid.n;
        let st = self.stride(slot);
        let mut out = psi.to_vec();
        let mut fiber = vec![Complex64::new(0.0, 0.0); n];
        for outer in 0..self.len() / (n * st) {
            for inner in 0..st {
                let base = outer * n * st + inner;
                for (j, v) in fiber.iter_mut().enumerate() {
                    *v = psi[base + j * st];
                }
                let r = f(&fiber);
                for (j, v) in r.into_iter().enumerate() {
                    out[base + j * st] = v;
                }
            }
        }
        out
    }

    /// Dense matrix acting on the contiguous slot group start..start+count.
    pub fn apply_group(&self, start: usize, count: usize, m: &CMat, psi: &[Complex64]) -> CVec {
        let n = self.grid.n;
        let size = n.pow(count as u32);
        let inner = n.pow((self.slots - start - count) as u32);
        let mut out = vec![Complex64::new(0.0, 0.0); psi.len()];
        for (o, chunk) in psi.chunks(size * inner).enumerate() {
            let block = DMatrix::from_row_slice(size, inner, chunk);
            let r = m * block;
            for i in 0..size {
                for j in 0..inner {
                    out[o * size * inner + i * inner + j] = r[(i, j)];
                }
            }
        }
        out
    }

    pub fn to_momentum(&self, psi: &[Complex64]) -> CVec {
        (0..self.slots).fold(psi.to_vec(), |v, s| {
            self.map_slot(s, &v, |f| {
                let mut w = f.to_vec();
                self.grid.to_momentum(&mut w);
                w
            })
        })
    }

    pub fn to_position(&self, psi: &[Complex64]) -> CVec {
        (0..self.slots).fold(psi.to_vec(), |v, s| {
            self.map_slot(s, &v, |f| {
                let mut w = f.to_vec();
                self.grid.to_position(&mut w);
                w
            })
        })
    }

    /// Momenta (k_0, .., k_{slots-1}) of a flat index.
    fn coords<'a>(&self, pts: &'a [f64], mut idx: usize, out: &mut [f64]) {
        let n = self.grid.n;
        for s in (0..self.slots).rev() {
            out[s] = pts[idx % n];
            idx /= n;
        }
    }

    /// Multiplier diagonal in all momenta, sampled from f(k_0, .., k_{slots-1}).
    pub fn sample_k<F: Fn(&[f64]) -> Complex64>(&self, f: F) -> CVec {
        let mut c = vec![0.0; self.slots];
        (0..self.len()).map(|i| {
            self.coords(&self.grid.k, i, &mut c);
            f(&c)
        }).collect()
    }

    pub fn sample_x<F: Fn(&[f64]) -> Complex64>(&self, f: F) -> CVec {
        let mut c = vec![0.0; self.slots];
        (0..self.len()).map(|i| {
            self.coords(&self.grid.x, i, &mut c);
            f(&c)
        }).collect()
    }

    pub fn apply_p(&self, d: &[Complex64], psi: &[Complex64]) -> CVec {
        let mut v = self.to_momentum(psi);
        v.iter_mut().zip(d).for_each(|(a, b)| *a *= b);
        self.to_position(&v)
    }

    pub fn apply_x(&self, d: &[Complex64], psi: &[Complex64]) -> CVec {
        psi.iter().zip(d).map(|(a, b)| a * b).collect()
    }

    /// Product of normalized one-particle Gaussians.
    pub fn gaussian(&self, centers: &[f64], widths: &[f64]) -> CVec {
        let g: Vec<CVec> = (0..self.slots).map(|s| self.grid.gaussian(centers[s], widths[s], 0.0)).collect();
        let mut c = vec![0usize; self.slots];
        let n = self.grid.n;
        let mut v: CVec = (0..self.len())
            .map(|mut i| {
                for s in (0..self.slots).rev() {
                    c[s] = i % n;
                    i /= n;
                }
                (0..self.slots).map(|s| g[s][c[s]]).product()
            })
            .collect();
        normalize(&mut v);
        v
    }
}

/// Kronecker product a (x) b with a acting on the slower index.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Gen {
    E,
    F,
    K,
}

/// P_{s2} (x) P_{s1} in centre-of-mass variables. Slot 0 carries X = (x1 + x2)/2 with conjugate
/// P = p1 + p2, slot 1 carries x = x1 - x2 with conjugate p = (p1 - p2)/2, so that
/// x2 = X - x/2, x1 = X + x/2, p2 = P/2 - p, p1 = P/2 + p.
pub struct TwoParticle {
    pub multi: Multi,
    pub b: f64,
    pub s2: f64,
    pub s1: f64,
}

/// One term of a co-product: D M D with D position-diagonal and M momentum-diagonal.
struct Sandwich {
    d: CVec,
    m: CVec,
}

impl TwoParticle {
    pub fn new(s2: f64, s1: f64, g: &Grid, m: &Modulus) -> Result<Self> {
        if !m.is_real() {
            return Err(Error::WrongRegime);
        }
        Ok(TwoParticle { multi: Multi::new(g, 2), b: m.b.re, s2, s1 })
    }

    /// Two-particle state psi(x2, x1) sampled in the reduced variables.
    pub fn sample<F: Fn(f64, f64) -> Complex64>(&self, f: F) -> CVec {
        let mut v = self.multi.sample_x(|c| f(c[0] - 0.5 * c[1], c[0] + 0.5 * c[1]));
        normalize(&mut v);
        v
    }

    /// e^{-((x2 - c2)/w2)^2 - ((x1 - c1)/w1)^2}, normalized.
    pub fn gaussian(&self, c2: f64, w2: f64, c1: f64, w1: f64) -> CVec {
        self.sample(|x2, x1| Complex64::from((-((x2 - c2) / w2).powi(2) - ((x1 - c1) / w1).powi(2)).exp()))
    }

    // X on particle `which` (2 or 1) tensored with K^a on the other one
    fn term(&self, which: u8, x: Gen, a: f64) -> Sandwich {
        let b = self.b;
        let sn = (PI * b * b).sin();
        let (sign_x, sign_s) = match x {
            Gen::E => (1.0, -1.0),
            Gen::F => (-1.0, 1.0),
            Gen::K => unreachable!(),
        };
        let (s, half) = if which == 2 { (self.s2, -0.5) } else { (self.s1, 0.5) };
        let d = self.multi.sample_x(|c| Complex64::from((sign_x * PI * b * (c[0] + half * c[1])).exp()));
        let m = self.multi.sample_k(|c| {
            let (p2, p1) = (0.5 * c[0] - c[1], 0.5 * c[0] + c[1]);
            let (own, other) = if which == 2 { (p2, p1) } else { (p1, p2) };
            Complex64::from((PI * b * (own + sign_s * s)).cosh() / sn * (-PI * b * a * other).exp())
        });
        Sandwich { d, m }
    }

    fn apply_terms(&self, terms: &[Sandwich], psi: &[Complex64]) -> CVec {
        let mp = &self.multi;
        let mut out = vec![Complex64::new(0.0, 0.0); psi.len()];
        for t in terms {
            let v = mp.apply_x(&t.d, &mp.apply_p(&t.m, &mp.apply_x(&t.d, psi)));
            out.iter_mut().zip(&v).for_each(|(o, a)| *o += a);
        }
        out
    }

    /// Delta(K)^a = e^{-pi b a P}.
    pub fn apply_total_k(&self, a: f64, psi: &[Complex64]) -> CVec {
        let d = self.multi.sample_k(|c| Complex64::from((-PI * self.b * a * c[0]).exp()));
        self.multi.apply_p(&d, psi)
    }

    /// Delta(X) psi with Delta(E) = E (x) K + K^{-1} (x) E, Delta(F) = F (x) K + K^{-1} (x) F,
    /// Delta(K) = K (x) K.
    pub fn coproduct_apply(&self, x: Gen, psi: &[Complex64]) -> CVec {
        match x {
            Gen::K => self.apply_total_k(1.0, psi),
            _ => self.apply_terms(&[self.term(2, x, 1.0), self.term(1, x, -1.0)], psi),
        }
    }

    /// The flipped co-product: Delta'(E) = K (x) E + E (x) K^{-1}, and likewise for F.
    pub fn opposite_apply(&self, x: Gen, psi: &[Complex64]) -> CVec {
        match x {
            Gen::K => self.apply_total_k(1.0, psi),
            _ => self.apply_terms(&[self.term(1, x, 1.0), self.term(2, x, -1.0)], psi),
        }
    }
}

/// Free-standing co-product application on P_{s2} (x) P_{s1} in the reduced variables.
pub fn coproduct_apply(x: Gen, psi: &[Complex64], s2: f64, s1: f64, g: &Grid, m: &Modulus) -> Result<CVec> {
    Ok(TwoParticle::new(s2, s1, g, m)?.coproduct_apply(x, psi))
}

/// Dense one-particle matrices E, F, K^a from an Efk bundle.
fn dense(a: &Efk, x: Gen, p: f64) -> CMat {
    match x {
        Gen::E => a.e.matrix.clone(),
        Gen::F => a.f.matrix.clone(),
        Gen::K => {
            let d: CVec = a.k_diag.iter().map(|&v| Complex64::from(v.powf(p))).collect();
            a.grid.p_matrix(&d)
        }
    }
}

/// Residuals of (2 sin(pi b^2) Delta(X))^{1/b^2} = 2 sin(pi / b^2) Delta(X~) for X = E, F, with the
/// dual side built directly as e~ = e^{pi x / b} 2 cosh(pi (p -+ s) / b) e^{pi x / b} so that it stays
/// finite when sin(pi / b^2) vanishes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CodualResiduals {
    pub e: f64,
    pub f: f64,
    /// Matrix-element form over pairs of states, relative to ||phi|| ||Delta(X~) psi||.
    pub weak_e: f64,
    pub weak_f: f64,
    /// Positivity floor of the two-particle 2 sin(pi b^2) Delta(E).
    pub floor_e: f64,
    pub floor_f: f64,
}

pub fn codual_residual(s2: f64, s1: f64, g: &Grid, m: &Modulus, states: &[CVec]) -> Result<CodualResiduals> {
    let a2 = build_efk_s(s2, g, m)?;
    let a1 = build_efk_s(s1, g, m)?;
    let b = a2.b;
    let gamma = 1.0 / (b * b);
    let sn = Complex64::from(2.0 * (PI * b * b).sin());
    let tp = Multi::new(g, 2);
    let dual_one = |s: f64, sign: f64| -> CMat {
        let w: CVec = g.x.iter().map(|&x| Complex64::from((sign * PI * x / b).exp())).collect();
        let c: CVec = g.k.iter().map(|&k| Complex64::from(2.0 * (PI * (k + sign * -s) / b).cosh())).collect();
        let wm = g.x_matrix(&w);
        &wm * g.p_matrix(&c) * &wm
    };
    let kt = |p: f64| -> CMat { g.p_matrix(&g.k.iter().map(|&k| Complex64::from((-PI * p * k / b).exp())).collect::<CVec>()) };
    let mut floors = [0.0; 2];
    let mut res = [0.0; 2];
    let mut weak = [0.0f64; 2];
    for (i, (x, sign)) in [(Gen::E, 1.0), (Gen::F, -1.0)].into_iter().enumerate() {
        let d = (kron(&dense(&a2, x, 1.0), &dense(&a1, Gen::K, 1.0)) + kron(&dense(&a2, Gen::K, -1.0), &dense(&a1, x, 1.0))) * sn;
        let eig = HermEig::new(&d);
        floors[i] = eig.min();
        eig.require_positive()?;
        let dual = kron(&dual_one(s2, sign), &kt(1.0)) + kron(&kt(-1.0), &dual_one(s1, sign));
        res[i] = max_residual(states, |p| eig.apply(|l| real_power(l, gamma), p), |p| tp.apply_group(0, 2, &dual, p));
        for phi in states {
            for psi in states {
                let a = inner(phi, &eig.apply(|l| real_power(l, gamma), psi));
                let dpsi = tp.apply_group(0, 2, &dual, psi);
                let c = inner(phi, &dpsi);
                weak[i] = weak[i].max((a - c).norm() / (norm(phi) * norm(&dpsi)));
            }
        }
    }
    Ok(CodualResiduals { e: res[0], f: res[1], weak_e: weak[0], weak_f: weak[1], floor_e: floors[0], floor_f: floors[1] })
}

fn wb_unit(x: f64, m: &Modulus) -> Result<Complex64> {
    Ok(log_wb(Complex64::new(x, 0.0), m)?.value.exp())
}

fn gb_fn(m: &Modulus) -> impl Fn(f64) -> Complex64 + '_ {
    move |l: f64| {
        if l <= 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            gb_pos(l, m).unwrap_or(Complex64::new(f64::NAN, f64::NAN))
        }
    }
}

/// The R-operator on P_{s2} (x) P_{s1} in product form:
/// R = q^{H (x) H} W g_b(e^{2 pi b (x2 - x1)}) W^{-1} q^{H (x) H}, with W = w_b(s2 - p2) w_b(s1 + p1)
/// and q^{H (x) H} = e^{-i pi p2 p1}, on the reduced lattice of [`TwoParticle`]. Every factor is
/// diagonal in position or momentum and none of them mixes different total momenta P.
pub struct RLattice {
    pub multi: Multi,
    pub s2: f64,
    pub s1: f64,
    qhh: CVec,
    w: CVec,
    w_inv: CVec,
    g: CVec,
}

pub fn r_lattice(s2: f64, s1: f64, g: &Grid, m: &Modulus) -> Result<RLattice> {
    if !m.is_real() {
        return Err(Error::WrongRegime);
    }
    let b = m.b.re;
    let multi = Multi::new(g, 2);
    let mut qhh = Vec::with_capacity(multi.len());
    let mut w = Vec::with_capacity(multi.len());
    for &pp in &g.k {
        for &p in &g.k {
            let (p2, p1) = (0.5 * pp - p, 0.5 * pp + p);
            qhh.push(Complex64::from_polar(1.0, -PI * p2 * p1));
            w.push(wb_unit(s2 - p2, m)? * wb_unit(s1 + p1, m)?);
        }
    }
    let w_inv = w.iter().map(|v| 1.0 / v).collect();
    let gf = gb_fn(m);
    let gd = multi.sample_x(|c| gf((-2.0 * PI * b * c[1]).exp()));
    Ok(RLattice { multi, s2, s1, qhh, w, w_inv, g: gd })
}

impl RLattice {
    pub fn apply(&self, psi: &[Complex64]) -> CVec {
        let mp = &self.multi;
        let mut v = mp.to_momentum(psi);
        v.iter_mut().zip(self.qhh.iter().zip(&self.w_inv)).for_each(|(a, (h, w))| *a *= h * w);
        let v = mp.apply_x(&self.g, &mp.to_position(&v));
        let mut v = mp.to_momentum(&v);
        v.iter_mut().zip(self.qhh.iter().zip(&self.w)).for_each(|(a, (h, w))| *a *= h * w);
        mp.to_position(&v)
    }

    /// max over states of | ||R psi|| / ||psi|| - 1 |.
    pub fn unitarity_defect(&self, states: &[CVec]) -> f64 {
        states.iter().map(|p| (norm(&self.apply(p)) / norm(p) - 1.0).abs()).fold(0.0, f64::max)
    }
}

/// max over states of ||R Delta(X) psi - Delta'(X) R psi|| / ||psi||.
pub fn intertwine_residual(x: Gen, r: &RLattice, tp: &TwoParticle, states: &[CVec]) -> f64 {
    max_residual(states, |p| r.apply(&tp.coproduct_apply(x, p)), |p| tp.opposite_apply(x, &r.apply(p)))
}

impl RLattice {
    /// R^dagger psi.
    pub fn apply_adjoint(&self, psi: &[Complex64]) -> CVec {
        let mp = &self.multi;
        let mut v = mp.to_momentum(psi);
        v.iter_mut().zip(self.qhh.iter().zip(&self.w)).for_each(|(a, (h, w))| *a *= (h * w).conj());
        let g: CVec = self.g.iter().map(|v| v.conj()).collect();
        let v = mp.apply_x(&g, &mp.to_position(&v));
        let mut v = mp.to_momentum(&v);
        v.iter_mut().zip(self.qhh.iter().zip(&self.w_inv)).for_each(|(a, (h, w))| *a *= (h * w).conj());
        mp.to_position(&v)
    }
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Matrix-element form of the intertwining relation: over all pairs (phi, psi) of states,
/// |<R^dagger phi, Delta(X) psi> - <Delta'(X) phi, R psi>| / (||Delta(X) psi|| + ||Delta'(X) phi||).
/// The generators only ever act on the test states, never on R psi.
pub fn intertwine_weak_residual(x: Gen, r: &RLattice, tp: &TwoParticle, states: &[CVec]) -> f64 {
    let mut worst: f64 = 0.0;
    for phi in states {
        let rphi = r.apply_adjoint(phi);
        let dphi = tp.opposite_apply(x, phi);
        for psi in states {
            let dpsi = tp.coproduct_apply(x, psi);
            let lhs = inner(&rphi, &dpsi);
            let rhs = inner(&dphi, &r.apply(psi));
            let scale = (norm(&dpsi) * norm(phi)).max(norm(&dphi) * norm(psi));
            worst = worst.max((lhs - rhs).norm() / scale);
        }
    }
    worst
}

/// Which factorization of the co-product of R to test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Quasi {
    /// (id (x) Delta) R = R13 R12
    #[serde(rename = "12-13")]
    First,
    /// (Delta (x) id) R = R13 R23
    #[serde(rename = "23-13")]
    Second,
}

/// Three-slot lattice with dense one-particle generators, slot i carrying spin s[i].
pub struct Triple {
    pub multi: Multi,
    pub m: Modulus,
    pub b: f64,
    e: Vec<CMat>,
    f: Vec<CMat>,
    k: Vec<CMat>,
    k_inv: Vec<CMat>,
}

impl Triple {
    pub fn new(s: [f64; 3], g: &Grid, m: &Modulus) -> Result<Self> {
        let mut t = Triple { multi: Multi::new(g, 3), m: m.clone(), b: 0.0, e: vec![], f: vec![], k: vec![], k_inv: vec![] };
        for &si in &s {
            let a = build_efk_s(si, g, m)?;
            t.b = a.b;
            let sn = Complex64::from(2.0 * (PI * a.b * a.b).sin());
            t.e.push(&a.e.matrix * sn);
            t.f.push(&a.f.matrix * sn);
            t.k.push(dense(&a, Gen::K, 1.0));
            t.k_inv.push(dense(&a, Gen::K, -1.0));
        }
        Ok(t)
    }

    /// q^{sum_(i,j) H_i H_j} over the listed slot pairs, diagonal in momentum.
    fn qhh(&self, pairs: &[(usize, usize)], psi: &[Complex64]) -> CVec {
        let d = self.multi.sample_k(|k| Complex64::from_polar(1.0, -PI * pairs.iter().map(|&(i, j)| k[i] * k[j]).sum::<f64>()));
        self.multi.apply_p(&d, psi)
    }

    /// g_b(A (x) B) psi for positive A on the slot group `ga` and B on `gb`; the groups are
    /// contiguous and ordered (ga before gb) unless they are slots 0 and 2.
    fn gb_tensor(&self, a: &CMat, ga: (usize, usize), bm: &CMat, gbg: (usize, usize), psi: &[Complex64]) -> Result<CVec> {
        let ea = HermEig::new(a);
        let eb = HermEig::new(bm);
        ea.require_positive()?;
        eb.require_positive()?;
        let mp = &self.multi;
        // rotate into the joint eigenbasis
        let v = mp.apply_group(ga.0, ga.1, &ea.vectors.adjoint(), psi);
        let v = mp.apply_group(gbg.0, gbg.1, &eb.vectors.adjoint(), &v);
        let gf = gb_fn(&self.m);
        let na = ea.values.len();
        let nb = eb.values.len();
        let n = self.multi.grid.n;
        let mut out = v.clone();
        for (i, val) in out.iter_mut().enumerate() {
            // index decomposition for the three slots
            let c = [i / (n * n), (i / n) % n, i % n];
            let ia = group_index(&c, ga, n);
            let ib = group_index(&c, gbg, n);
            debug_assert!(ia < na && ib < nb);
            *val *= gf(ea.values[ia] * eb.values[ib]);
        }
        let v = mp.apply_group(gbg.0, gbg.1, &eb.vectors, &out);
        Ok(mp.apply_group(ga.0, ga.1, &ea.vectors, &v))
    }

    /// R_{ij} psi = q^{H_i H_j} g_b(e_i f_j) q^{H_i H_j} psi for single slots i != j.
    pub fn r_pair(&self, i: usize, j: usize, psi: &[Complex64]) -> Result<CVec> {
        let v = self.qhh(&[(i, j)], psi);
        let v = self.gb_tensor(&self.e[i], (i, 1), &self.f[j], (j, 1), &v)?;
        Ok(self.qhh(&[(i, j)], &v))
    }

    pub fn quasitriangular_residual(&self, which: Quasi, states: &[CVec]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for psi in states {
            let (lhs, rhs) = match which {
                Quasi::First => {
                    let df = kron(&self.f[1], &self.k[2]) + kron(&self.k_inv[1], &self.f[2]);
                    let pairs = [(0, 1), (0, 2)];
                    let v = self.qhh(&pairs, psi);
                    let v = self.gb_tensor(&self.e[0], (0, 1), &df, (1, 2), &v)?;
                    let lhs = self.qhh(&pairs, &v);
                    let rhs = self.r_pair(0, 2, &self.r_pair(0, 1, psi)?)?;
                    (lhs, rhs)
                }
                Quasi::Second => {
                    let de = kron(&self.e[0], &self.k[1]) + kron(&self.k_inv[0], &self.e[1]);
                    let pairs = [(0, 2), (1, 2)];
                    let v = self.qhh(&pairs, psi);
                    let v = self.gb_tensor(&de, (0, 2), &self.f[2], (2, 1), &v)?;
                    let lhs = self.qhh(&pairs, &v);
                    let rhs = self.r_pair(0, 2, &self.r_pair(1, 2, psi)?)?;
                    (lhs, rhs)
                }
            };
            worst = worst.max(diff_norm(&lhs, &rhs) / norm(psi));
        }
        Ok(worst)
    }
}

fn group_index(c: &[usize; 3], g: (usize, usize), n: usize) -> usize {
    (g.0..g.0 + g.1).fold(0, |acc, s| acc * n + c[s])
}

/// (id (x) Delta) R against R13 R12, or (Delta (x) id) R against R13 R23, on P_{s[0]} (x) P_{s[1]} (x) P_{s[2]}.
pub fn quasitriangular_residual(which: Quasi, s: [f64; 3], g: &Grid, m: &Modulus, widths: &[f64]) -> Result<f64> {
    let t = Triple::new(s, g, m)?;
    let states: Vec<CVec> = widths.iter().map(|&w| t.multi.gaussian(&[0.0; 3], &[w; 3])).collect();
    t.quasitriangular_residual(which, &states)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(n: usize, l: f64, b: f64) -> (Grid, Modulus) {
        (Grid::new(n, l).unwrap(), Modulus::real(b).unwrap())
    }

    #[test]
    fn slot_maps_match_dense_kronecker() {
        let (g, m) = setup(8, 4.0, 0.7);
        let a = build_efk_s(0.2, &g, &m).unwrap();
        let tp = Multi::new(&g, 2);
        let psi = tp.gaussian(&[0.1, -0.2], &[0.8, 0.6]);
        let id = CMat::identity(8, 8);
        let d = kron(&a.e.matrix, &id);
        let r1 = tp.apply_group(0, 2, &d, &psi);
        let r2 = tp.map_slot(0, &psi, |f| a.e.apply(f));
        assert!(diff_norm(&r1, &r2) < 1e-12 * norm(&r1));
        let d = kron(&id, &a.f.matrix);
        let r1 = tp.apply_group(0, 2, &d, &psi);
        let r2 = tp.apply_group(1, 1, &a.f.matrix, &psi);
        assert!(diff_norm(&r1, &r2) < 1e-12 * norm(&r1));
    }

    #[test]
    fn coproduct_of_k_is_diagonal() {
        let (g, m) = setup(16, 5.0, 0.7);
        let tp = TwoParticle::new(0.4, 0.2, &g, &m).unwrap();
        let psi = tp.gaussian(0.0, 0.7, 0.3, 0.7);
        let mut a = tp.multi.to_momentum(&psi);
        let b = tp.multi.to_momentum(&tp.coproduct_apply(Gen::K, &psi));
        let mut c = vec![0.0; 2];
        for (i, v) in a.iter_mut().enumerate() {
            c[0] = g.k[i / 16];
            *v *= (-PI * 0.7 * c[0]).exp();
        }
        assert!(diff_norm(&a, &b) < 1e-13);
    }

    #[test]
    fn coproducts_are_positive_on_a_gaussian() {
        let (g, m) = setup(64, 8.0, 0.7);
        let tp = TwoParticle::new(0.4, 0.2, &g, &m).unwrap();
        let psi = tp.gaussian(0.0, 0.6, 0.0, 0.6);
        let d = tp.coproduct_apply(Gen::E, &psi);
        let dp = tp.opposite_apply(Gen::E, &psi);
        // both terms are positive operators, so <psi, Delta(E) psi> > 0
        let ip: Complex64 = psi.iter().zip(&d).map(|(a, b)| a.conj() * b).sum();
        let ip2: Complex64 = psi.iter().zip(&dp).map(|(a, b)| a.conj() * b).sum();
        assert!(ip.re > 0.0 && ip.im.abs() < 1e-8 * ip.re);
        assert!(ip2.re > 0.0 && ip2.im.abs() < 1e-8 * ip2.re);
    }

    #[test]
    fn r_is_unitary_and_commutes_with_k() {
        let (g, m) = setup(32, 6.0, 0.7);
        let r = r_lattice(0.4, 0.2, &g, &m).unwrap();
        let tp = TwoParticle::new(0.4, 0.2, &g, &m).unwrap();
        let st = vec![tp.gaussian(0.0, 0.7, 0.0, 0.7), tp.gaussian(0.3, 0.6, -0.2, 0.8)];
        assert!(r.unitarity_defect(&st) < 1e-12);
        let rk = intertwine_residual(Gen::K, &r, &tp, &st);
        assert!(rk < 1e-10, "{rk}");
    }

    #[test]
    fn weak_intertwining_of_e_and_f() {
        let (g, m) = setup(64, 8.0, 0.7);
        let r = r_lattice(0.4, 0.2, &g, &m).unwrap();
        let tp = TwoParticle::new(0.4, 0.2, &g, &m).unwrap();
        let st = vec![tp.gaussian(0.0, 0.7, 0.0, 0.7), tp.gaussian(0.3, 0.6, -0.2, 0.8)];
        assert!(intertwine_weak_residual(Gen::E, &r, &tp, &st) < 1e-3);
        assert!(intertwine_weak_residual(Gen::F, &r, &tp, &st) < 1e-3);
    }

    #[test]
    fn codual_matrix_elements() {
        let (g, m) = setup(16, 5.0, 0.5f64.sqrt());
        let mp = Multi::new(&g, 2);
        let st = vec![mp.gaussian(&[0.0, 0.0], &[0.6, 0.6]), mp.gaussian(&[0.2, -0.1], &[0.7, 0.6])];
        let c = codual_residual(0.3, 0.2, &g, &m, &st).unwrap();
        assert!(c.floor_e > 0.0 && c.floor_f > 0.0);
        assert!(c.weak_e < 1e-4 && c.weak_f < 1e-4, "{c:?}");
    }

    #[test]
    fn quasitriangularity_improves_with_resolution() {
        let m = Modulus::real(0.7).unwrap();
        let coarse = quasitriangular_residual(Quasi::First, [0.3, 0.4, 0.2], &Grid::new(8, 4.0).unwrap(), &m, &[0.8]).unwrap();
        let fine = quasitriangular_residual(Quasi::First, [0.3, 0.4, 0.2], &Grid::new(16, 4.0).unwrap(), &m, &[0.8]).unwrap();
        assert!(fine < coarse, "{coarse} {fine}");
    }
}
