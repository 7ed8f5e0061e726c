//! Invariant batteries, one per suite. Checks run on the rayon pool; the report keeps the
//! declaration order.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::f64::consts::PI;

use mdlab::identities::{beta_integral, binomial_scalar_check, fourier_gb, pascal_residual, rho_funceq_residual, FourierSign};
use mdlab::kernels::*;
use mdlab::opsim::efk::{build_efk_s, power_duality_residual};
use mdlab::opsim::grid::Grid;
use mdlab::opsim::haar::{haar_adjoint_residual, AdGen, HaarMode, RandomFamily};
use mdlab::opsim::rmat::{intertwine_residual, intertwine_weak_residual, quasitriangular_residual, r_lattice, Gen, Quasi, TwoParticle};
use mdlab::opsim::verma::{hw_continuation_check, verma_generators, verma_intertwine_residual, VGen, VermaModule};
use mdlab::opsim::weyl::{battery, pentagon_residual, qexp_residual, weyl_pair};
use mdlab::specfun::checks::{battery_points, identity_residuals};
use mdlab::specfun::{gb_product, limit_xGb, residue_inv_Gb, residue_inv_Gb_numeric, wb, Gb};
use mdlab::{Error, Modulus, Result};

use crate::config::SuiteConfig;
use crate::report::{Check, Report};

type Job = Box<dyn Fn(&SuiteConfig, &Modulus) -> Vec<Check> + Send + Sync>;

/// (name, paper_ref, default tolerance)
type Item = (&'static str, &'static str, f64);

fn one<F>(name: &'static str, r: &'static str, tol: f64, f: F) -> Job
where
    F: Fn(&SuiteConfig, &Modulus) -> Result<f64> + Send + Sync + 'static,
{
    Box::new(move |c, m| vec![Check::new(name, r, f(c, m), c.tol(name, tol))])
}

fn group<F>(items: &'static [Item], f: F) -> Job
where
    F: Fn(&SuiteConfig, &Modulus) -> Result<Vec<f64>> + Send + Sync + 'static,
{
    Box::new(move |c, m| match f(c, m) {
        Ok(v) => items.iter().zip(v).map(|(&(n, r, t), x)| Check::new(n, r, Ok(x), c.tol(n, t))).collect(),
        Err(e) => items.iter().map(|&(n, r, t)| Check::new(n, r, Err(e.clone()), c.tol(n, t))).collect(),
    })
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

const GB_ITEMS: [Item; 7] = [
    ("gb_shift_b", "G_b shift equation in b", 1e-9),
    ("gb_shift_binv", "G_b shift equation in 1/b", 1e-9),
    ("gb_reflection", "G_b reflection", 1e-9),
    ("gb_conjugation", "G_b complex conjugation", 1e-9),
    ("gb_self_duality", "b <-> 1/b self-duality of G_b", 1e-9),
    ("gb_product_xx", "closed form of G_b(x) G_b(-x)", 1e-9),
    ("wb_shift", "w_b shift equations", 1e-9),
];

const RESIDUE_ITEMS: [Item; 4] = [
    ("gb_residue_00", "residues of 1/G_b", 1e-8),
    ("gb_residue_10", "residues of 1/G_b", 1e-8),
    ("gb_residue_01", "residues of 1/G_b", 1e-8),
    ("gb_residue_11", "residues of 1/G_b", 1e-8),
];

fn specfun_jobs(m: &Modulus) -> Vec<Job> {
    let mut jobs = vec![
        group(&GB_ITEMS, |c, m| {
            let mut worst = [0.0f64; 7];
            for x in battery_points(100, c.seed, 0.05, m) {
                let r = identity_residuals(x, 0.05, m)?;
                let v = [r.shift_b, r.shift_binv, r.reflection, r.conjugation, r.duality, r.gxx, r.w_shift];
                worst.iter_mut().zip(v).for_each(|(w, v)| *w = w.max(v));
            }
            Ok(worst.to_vec())
        }),
        one("x_gb_limit", "x G_b(x) -> 1/2pi at the origin", 1e-8, |_, m| Ok((limit_xGb(m)?.value - 1.0 / (2.0 * PI)).norm())),
        group(&RESIDUE_ITEMS, |_, m| {
            [(0, 0), (1, 0), (0, 1), (1, 1)]
                .iter()
                .map(|&(n, k)| Ok((residue_inv_Gb_numeric(n, k, m, 0.01)? - residue_inv_Gb(n, k, m)?).norm()))
                .collect()
        }),
    ];
    if m.is_real() {
        jobs.push(one("wb_unimodular", "|w_b| = 1 on the real line", 1e-12, |_, m| {
            let mut worst: f64 = 0.0;
            for x in [-7.3, -1.0, -0.2, 0.0, 0.37, 1.234, 4.0] {
                worst = worst.max((wb(c(x, 0.0), m)?.value.norm() - 1.0).abs());
            }
            Ok(worst)
        }));
    } else {
        jobs.push(one("product_vs_ladder", "double-product representation of G_b", 1.0, |cfg, m| product_agreement(cfg.seed, cfg.budget, m)));
    }
    jobs
}

/// max over 20 seeded strip points of |product - ladder| / (err_product + err_ladder).
pub fn product_agreement(seed: u64, n_terms: usize, m: &Modulus) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q2 = m.qq() / 2.0;
    let w = m.strip_width();
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let x = q2 + c(rng.gen_range(-0.5..0.5) * w, rng.gen_range(-1.0..1.0));
        let p = gb_product(x, m, n_terms)?;
        let l = Gb(x, m)?;
        worst = worst.max((p.value - l.value).norm() / (p.err_est + l.err_est));
    }
    Ok(worst)
}

fn identities_jobs() -> Vec<Job> {
    vec![
        one("beta_integral", "b-beta integral", 1e-6, |_, m| {
            let q = m.qq();
            let mut worst: f64 = 0.0;
            for i in 0..5 {
                for j in 0..5 {
                    let a = q * (0.08 * (i + 1) as f64) + c(0.0, 0.05 * (i as f64 - 2.0));
                    let b = q * (0.08 * (j + 1) as f64) + c(0.0, -0.04 * (j as f64 - 2.0));
                    worst = worst.max(beta_integral(a, b, m)?.residual());
                }
            }
            Ok(worst)
        }),
        one("fourier_gb_plus", "Fourier transform of 1/G_b (Gaussian damping)", 1e-7, |_, m| fourier_worst(FourierSign::Plus, m)),
        one("fourier_gb_minus", "Fourier transform of 1/G_b (exponential damping)", 1e-7, |_, m| fourier_worst(FourierSign::Minus, m)),
        one("rho_functional_equation", "rho functional equation", 1e-9, |_, m| {
            let mut worst: f64 = 0.0;
            for t in [c(-1.1, 0.0), c(-0.3, 0.0), c(0.4, 0.0), c(1.3, 0.0), c(0.2, 0.1)] {
                worst = worst.max(rho_funceq_residual(t, m)?);
            }
            Ok(worst)
        }),
        one("q_pascal", "q-Pascal rule for the b-binomial", 1e-9, |_, m| {
            let mut worst: f64 = 0.0;
            for (t, tau) in [(c(0.9, 0.0), c(0.2, 0.0)), (c(-0.7, 0.0), c(0.3, 0.2)), (c(1.2, 0.0), c(-0.5, 0.3)), (c(0.1, 0.0), c(0.6, 0.15))] {
                worst = worst.max(pascal_residual(t, tau, m)?);
            }
            Ok(worst)
        }),
        one("binomial_scalar_limit", "b-binomial residue at tau = 0", 1e-9, |_, m| binomial_scalar_check(0.5, m)),
    ]
}

fn fourier_worst(sign: FourierSign, m: &Modulus) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for r in [-0.6, -0.2, 0.0, 0.3, 0.7] {
        worst = worst.max(fourier_gb(r, m, sign)?.residual());
    }
    Ok(worst)
}

const CGC_TRIPLE: (f64, f64, f64) = (0.3, 0.5, 0.2);

fn kernels_jobs() -> Vec<Job> {
    vec![
        one("r_position_eta_halving", "i0 regularization of the position R kernel", 1e-6, |_, m| {
            let sp = SpinPair::new(0.5, 0.3);
            let a = r_kernel_position_at(0.3, -0.2, 0.1, 0.25, sp, 1e-8, m)?;
            let b = r_kernel_position_at(0.3, -0.2, 0.1, 0.25, sp, 5e-9, m)?;
            Ok(rel(a, b))
        }),
        one("r_momentum_pole_order", "simple pole of the momentum R kernel", 5e-3, |_, m| {
            Ok((momentum_pole_fit(0.3, -0.2, SpinPair::new(0.5, 0.3), 1e-3, m)?.order - 1.0).abs())
        }),
        one("r_momentum_pole_residue", "residue of 1/G_b at Q in the momentum R kernel", 1e-6, |_, m| {
            let fit = momentum_pole_fit(0.3, -0.2, SpinPair::new(0.5, 0.3), 1e-3, m)?;
            Ok((fit.residue * 2.0 * PI + 1.0).norm())
        }),
        one("r_momentum_unitarity", "unitarity of R through the momentum kernel", 5e-3, |_, m| {
            let g = Grid::new(64, 128f64.sqrt())?;
            let psi = MomentumState::from_position(&g, |x2, x1| c((-(x2 - 0.2).powi(2) / 1.2 - (x1 + 0.1).powi(2)).exp(), 0.0))?;
            let out = apply_r_momentum(&psi, SpinPair::new(0.5, 0.3), m)?;
            Ok((out.norm() / psi.norm() - 1.0).abs())
        }),
        one("omega_unimodular", "|Omega| = 1", 1e-14, |_, m| Ok((omega(0.3, 0.5, 0.2, m).norm() - 1.0).abs())),
        one("cgc_residue_closed_form", "residues of the Clebsch-Gordan kernel", 1e-6, |_, m| {
            let (s3, s2, s1) = CGC_TRIPLE;
            let mut worst: f64 = 0.0;
            for side in [Side::Left, Side::Right] {
                let a = cgc_residue(side, 0.37, s3, s2, s1, m)?;
                let e = cgc_residue_closed(side, 0.37, s3, s2, s1, HConvention::Plus, m)?;
                worst = worst.max(rel(a, e));
            }
            Ok(worst)
        }),
        one("cgc_position_conjugation", "position-space conjugation symmetry of the Clebsch-Gordan kernel", 1e-8, |_, m| {
            let (s3, s2, s1) = CGC_TRIPLE;
            let r = position_conj_residuals(c(0.31, 0.0), c(-0.17, 0.0), c(0.44, 0.0), s3, s2, s1, HConvention::Plus, m)?;
            Ok(r[0].max(r[1]))
        }),
        one("cgc_momentum_conjugation", "momentum-space conjugation symmetry of the Clebsch-Gordan kernel", 1e-7, |_, m| {
            let (s3, s2, s1) = CGC_TRIPLE;
            let r = momentum_conj_residuals(0.21, 0.37, s3, s2, s1, m)?;
            Ok(r[0].max(r[1]))
        }),
    ]
}

const RELATION_ITEMS: [Item; 2] = [("lattice_relations", "defining relations", 1e-7), ("lattice_casimir", "Casimir value", 1e-7)];
const DUALITY_ITEMS: [Item; 2] = [("lattice_duality_ef", "modular duality of E and F", 1e-5), ("lattice_duality_k", "modular duality of K", 1e-10)];
const R_ITEMS: [Item; 4] = [
    ("r_unitarity", "unitarity of the R-operator", 1e-6),
    ("r_intertwine_k", "R intertwines the co-product", 1e-3),
    ("r_intertwine_e", "R intertwines the co-product", 1e-3),
    ("r_intertwine_f", "R intertwines the co-product", 1e-3),
];

fn lattice_grid(c: &SuiteConfig) -> Result<Grid> {
    Grid::new(c.grid.unwrap_or(64), c.length.unwrap_or(8.0))
}

fn lattice_jobs() -> Vec<Job> {
    vec![
        group(&RELATION_ITEMS, |c, m| {
            let g = lattice_grid(c)?;
            let r = build_efk_s(0.3, &g, m)?.relation_residuals(&battery(&g, &[0.6, 0.7]));
            Ok(vec![r.ke.max(r.kf).max(r.ef), r.casimir])
        }),
        group(&DUALITY_ITEMS, |c, m| {
            let g = lattice_grid(c)?;
            let r = power_duality_residual(0.3, &g, m, &battery(&g, &[0.6, 0.7]))?;
            Ok(vec![r.e.max(r.f), r.k])
        }),
        one("lattice_qexp", "quantum exponential", 1e-5, |c, m| {
            let g = lattice_grid(c)?;
            qexp_residual(&weyl_pair(&g, m), m, &battery(&g, &[0.6, 0.7]))
        }),
        one("lattice_pentagon", "pentagon identity", 1e-5, |c, m| {
            let g = lattice_grid(c)?;
            pentagon_residual(&weyl_pair(&g, m), m, &battery(&g, &[0.6, 0.7]))
        }),
        group(&R_ITEMS, |c, m| {
            let g = lattice_grid(c)?;
            let r = r_lattice(0.4, 0.2, &g, m)?;
            let tp = TwoParticle::new(0.4, 0.2, &g, m)?;
            let st = vec![tp.gaussian(0.0, 0.7, 0.0, 0.7), tp.gaussian(0.3, 0.6, -0.2, 0.8)];
            Ok(vec![
                r.unitarity_defect(&st),
                intertwine_residual(Gen::K, &r, &tp, &st),
                intertwine_weak_residual(Gen::E, &r, &tp, &st),
                intertwine_weak_residual(Gen::F, &r, &tp, &st),
            ])
        }),
        one("r_quasitriangular_refinement", "quasitriangularity of R", 0.999, |_, m| {
            let s = [0.3, 0.4, 0.2];
            let coarse = quasitriangular_residual(Quasi::First, s, &Grid::new(8, 4.0)?, m, &[0.8])?;
            let fine = quasitriangular_residual(Quasi::First, s, &Grid::new(16, 4.0)?, m, &[0.8])?;
            Ok(fine / coarse)
        }),
    ]
}

const VERMA_ITEMS: [Item; 3] = [
    ("verma_intertwine_e", "intertwining of the series R on Verma modules", 1e-10),
    ("verma_intertwine_f", "intertwining of the series R on Verma modules", 1e-10),
    ("verma_intertwine_k", "intertwining of the series R on Verma modules", 1e-10),
];

const HW_ITEMS: [Item; 3] = [
    ("hw_continuation_0", "highest-weight continuation of the R kernel", 1e-6),
    ("hw_continuation_1", "highest-weight continuation of the R kernel", 1e-6),
    ("hw_continuation_2", "highest-weight continuation of the R kernel", 1e-6),
];

fn verma_jobs() -> Vec<Job> {
    vec![
        group(&VERMA_ITEMS, |_, m| [VGen::E, VGen::F, VGen::K].iter().map(|&x| verma_intertwine_residual(x, 0.5, 0.2, 6, m)).collect()),
        one("hw_annihilation", "F annihilates the highest weight", 1e-12, |_, m| {
            let v = VermaModule::new(0.2, 6, m);
            Ok(verma_generators(&v).f.column(0).norm())
        }),
        group(&HW_ITEMS, |_, m| (0..3).map(|n| hw_continuation_check(n, 0.5, 0.2, m)).collect()),
    ]
}

const BRAIDING_ITEMS: [Item; 4] = [
    ("braiding_vs_omega", "braiding eigenvalue Omega", 1e-6),
    ("braiding_vs_omega_prefactor_h", "braiding eigenvalue with the Clebsch-Gordan h_s", 1e-6),
    ("braiding_residue_closed_form", "residues of the Clebsch-Gordan kernel", 1e-6),
    ("braiding_residue_modulus", "equal moduli of the two residues", 1e-10),
];

/// Seeded spin triples and momenta for the braiding suite.
pub fn braiding_draws(seed: u64, n: usize) -> Vec<([f64; 3], f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| ([rng.gen_range(0.05..0.9), rng.gen_range(0.05..0.9), rng.gen_range(0.05..0.9)], rng.gen_range(-0.5..0.5))).collect()
}

/// Worst-case braiding residuals over seeded triples: against Omega, against Omega with the
/// s^2 + Q^2/4 weights, closed-form residues, and the modulus relation.
pub fn braiding_residuals(seed: u64, n: usize, m: &Modulus) -> Result<[f64; 4]> {
    let q = m.qq();
    let mut w = [0.0f64; 4];
    for ([s3, s2, s1], k1) in braiding_draws(seed, n) {
        let l = cgc_residue(Side::Left, k1, s3, s2, s1, m)?;
        let r = cgc_residue(Side::Right, k1, s3, s2, s1, m)?;
        let ratio = braiding_ratio(k1, s3, s2, s1, m)?;
        w[0] = w[0].max((ratio / omega(s3, s2, s1, m) - 1.0).norm());
        w[1] = w[1].max((ratio / omega_with(s3, s2, s1, HConvention::Plus, m) - 1.0).norm());
        for (side, v) in [(Side::Left, l), (Side::Right, r)] {
            w[2] = w[2].max(rel(v, cgc_residue_closed(side, k1, s3, s2, s1, HConvention::Plus, m)?));
        }
        w[3] = w[3].max(((l * (PI * q * k1).exp()).norm() - r.norm()).abs() / r.norm());
    }
    Ok(w)
}

fn braiding_jobs() -> Vec<Job> {
    vec![group(&BRAIDING_ITEMS, |c, m| braiding_residuals(c.seed, 10, m).map(|w| w.to_vec()))]
}

const ADJOINT_ITEMS: [Item; 3] = [
    ("haar_adjoint_k", "Haar adjoint invariance", 1e-12),
    ("haar_adjoint_e", "Haar adjoint invariance", 1e-5),
    ("haar_adjoint_f", "Haar adjoint invariance", 1e-5),
];

const ORTHO_ITEMS: [Item; 3] = [
    ("orthogonality_coarse", "orthogonality of the Clebsch-Gordan kernels", 5e-2),
    ("orthogonality_refined", "orthogonality of the Clebsch-Gordan kernels", 5e-2),
    ("orthogonality_refinement_ratio", "orthogonality of the Clebsch-Gordan kernels", 0.999),
];

/// Smeared orthogonality residuals at the coarse reference grid and one refinement.
pub fn orthogonality_pair(m: &Modulus) -> Result<(f64, f64)> {
    let (g1, g2, g3, g4) = (gaussian(0.2, 0.6), gaussian(-0.1, 0.5), gaussian(0.3, 0.6), gaussian(0.0, 0.5));
    let f = TestFns { f3: &g1, f3p: &g3, f2: &g2, f2p: &g4 };
    let grid = OrthoGrid::coarse();
    let a = orthogonality_residual(&f, 0.4, 0.6, &grid, m)?;
    let b = orthogonality_residual(&f, 0.4, 0.6, &grid.refined(), m)?;
    Ok((a, b))
}

fn haar_jobs() -> Vec<Job> {
    vec![
        group(&ADJOINT_ITEMS, |c, m| {
            let g = Grid::new(c.grid.unwrap_or(128), c.length.unwrap_or(11.3))?;
            let fam = RandomFamily::new(&g, 3, c.seed);
            [AdGen::K, AdGen::E, AdGen::F].iter().map(|&x| haar_adjoint_residual(x, HaarMode::Lattice, &fam, 8, 2.0, m)).collect()
        }),
        one("haar_adjoint_ef_analytic", "Haar adjoint invariance", 1e-8, |c, m| {
            let g = Grid::new(c.grid.unwrap_or(128), c.length.unwrap_or(11.3))?;
            haar_adjoint_residual(AdGen::EF, HaarMode::Analytic, &RandomFamily::new(&g, 3, c.seed), 8, 2.0, m)
        }),
        one("haar_gaussian_kernel", "Haar functional on kernel families", 1e-10, |_, m| {
            let k = |k: f64, kp: f64, s: f64| Complex64::from((-k * k - kp * kp - s * s).exp());
            let v = haar(HaarSide::Left, &k, (0.0, 16.0), 0.05, m)?;
            let r = haar_gaussian_reference(m);
            Ok((v - r).norm() / r)
        }),
        one("haar_reflection", "left and right Haar functionals under k -> -k", 1e-12, |_, m| {
            let k = |k: f64, kp: f64, s: f64| c(0.3 * k, 1.0 + kp).exp() * (-(k - 0.4).powi(2) - kp * kp - (s - 1.0).powi(2)).exp();
            let kr = |a: f64, b: f64, s: f64| k(-a, -b, s);
            let l = haar(HaarSide::Left, &k, (0.0, 3.0), 0.05, m)?;
            let r = haar(HaarSide::Right, &kr, (0.0, 3.0), 0.05, m)?;
            Ok(rel(r, l))
        }),
        group(&ORTHO_ITEMS, |_, m| orthogonality_pair(m).map(|(a, b)| vec![a, b, b / a])),
        one("orthogonality_disjoint", "orthogonality against disjoint supports", 1e-5, |_, m| {
            let (a, b, c) = (bump(-1.0, 0.7), bump(1.0, 0.7), bump(0.0, 0.6));
            let f = TestFns { f3: &a, f3p: &b, f2: &c, f2p: &c };
            let g = OrthoGrid { k_max: 2.0, s1_panels: 15, ..OrthoGrid::coarse() };
            Ok(orthogonality_terms(&f, 0.4, 0.6, &g, m)?.residual)
        }),
    ]
}

fn jobs_for(suite: &str, m: &Modulus) -> Vec<Job> {
    match suite {
        "specfun" => specfun_jobs(m),
        "identities" => identities_jobs(),
        "kernels" => kernels_jobs(),
        "lattice" => lattice_jobs(),
        "verma" => verma_jobs(),
        "braiding" => braiding_jobs(),
        "haar" => haar_jobs(),
        _ => ["specfun", "identities", "kernels", "lattice", "verma", "braiding", "haar"].iter().flat_map(|s| jobs_for(s, m)).collect(),
    }
}

/// Runs the configured suite. Only configuration problems are errors; failures inside a
/// check are recorded on that check.
pub fn run_suite(cfg: &SuiteConfig) -> Result<Report> {
    cfg.validate()?;
    let m = cfg.modulus()?;
    let jobs = jobs_for(&cfg.suite, &m);
    let checks: Vec<Vec<Check>> = jobs.par_iter().map(|j| j(cfg, &m)).collect();
    let params = serde_json::to_value(cfg).map_err(|e| Error::ConfigInvalid(e.to_string()))?;
    Ok(Report::new(&cfg.suite, params, checks.into_iter().flatten().collect()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn draws_are_seeded() {
        assert_eq!(braiding_draws(4, 3), braiding_draws(4, 3));
        assert_ne!(braiding_draws(4, 3), braiding_draws(5, 3));
    }

    #[test]
    fn check_names_are_unique() {
        let m = Modulus::real(0.7).unwrap();
        let mut names: Vec<&str> = GB_ITEMS
            .iter()
            .chain(&RESIDUE_ITEMS)
            .chain(&RELATION_ITEMS)
            .chain(&DUALITY_ITEMS)
            .chain(&R_ITEMS)
            .chain(&VERMA_ITEMS)
            .chain(&HW_ITEMS)
            .chain(&BRAIDING_ITEMS)
            .chain(&ADJOINT_ITEMS)
            .chain(&ORTHO_ITEMS)
            .map(|i| i.0)
            .collect();
        let n = names.len();
        names.sort();
        names.dedup();
        assert_eq!(n, names.len());
        assert!(jobs_for("all", &m).len() > 20);
    }
}
