//! The acceptance battery: eight criteria, each a list of named checks.
//! `Suite::Full` runs at the stated sample sizes; `Suite::Fast` uses fewer
//! samples and a reduced case list. Every tolerance is multiplied by
//! `tol_scale`, so a zero scale must fail.

use std::f64::consts::PI;
use std::time::Instant;

use crate::analytic::series::{moments_series_z, moments_series_zk};
use crate::analytic::{
    asymptotic_trace_moment, cloning_exceed_prob, mean_fidelity_2k, mean_fidelity_3k_explicit, mean_fidelity_n2_explicit, mean_fidelity_nk,
    mean_purity, mean_root_fidelity_2k_explicit, mean_root_fidelity_3k_explicit, mean_root_fidelity_n2_explicit, mean_root_fidelity_nk,
    moment_root_fidelity_series, pdf_fidelity_2k_asymptotic, pdf_fidelity_2k_closed, pdf_pure_hs, pdf_pure_induced, pdf_pure_pure,
    pdf_pure_real_induced, AsymptoticMeasure, SeriesConfig,
};
use crate::cli::{dist_output, family_measures, mean_rows, reference, CliError, Family, MethodArg, StatisticArg};
use crate::curve::midpoint_grid;
use crate::distnum::{pdf_fidelity_2k_integral, pdf_pure_bures, WConfig, WPipelineState};
use crate::montecarlo::{ks_statistic, run_experiment, ExperimentSpec, Statistic};
use crate::quad::{integrate, EndpointSubstitution, QuadConfig};
use crate::samplers::{haar_unitary, sample_hs, sample_measure, BuresMcmcConfig, MeasureSpec, RngStream};
use crate::state::{bures_angle, bures_distance, fidelity, fidelity_n2, root_fidelity, BlochVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Fast,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub suite: Suite,
    pub seed: u64,
    pub tol_scale: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { suite: Suite::Fast, seed: 1, tol_scale: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionReport {
    pub id: u8,
    pub title: &'static str,
    pub checks: Vec<Check>,
    pub seconds: f64,
}

impl CriterionReport {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    pub fn line(&self) -> String {
        let ok = self.checks.iter().filter(|c| c.passed).count();
        format!(
            "criterion {}: {} - {} ({}/{} checks, {:.1} s)",
            self.id,
            if self.passed() { "PASS" } else { "FAIL" },
            self.title,
            ok,
            self.checks.len(),
            self.seconds
        )
    }
}

pub const TITLES: [&str; 8] = [
    "closed-form constants",
    "route cross-validation",
    "Monte Carlo vs analytic means",
    "distribution goodness of fit",
    "W pipeline",
    "asymptotics",
    "property suites",
    "figure data",
];

struct Ctx {
    opts: VerifyOptions,
    checks: Vec<Check>,
    next_seed: u64,
}

impl Ctx {
    fn new(opts: VerifyOptions, id: u8) -> Self {
        Ctx { opts, checks: Vec::new(), next_seed: opts.seed.wrapping_mul(1000).wrapping_add(id as u64 * 100_000) }
    }

    fn full(&self) -> bool {
        self.opts.suite == Suite::Full
    }

    fn samples(&self, full: usize, fast: usize) -> usize {
        if self.full() {
            full
        } else {
            fast
        }
    }

    fn seed(&mut self) -> u64 {
        self.next_seed += 1;
        self.next_seed
    }

    fn push(&mut self, name: impl Into<String>, passed: bool, detail: String) {
        self.checks.push(Check { name: name.into(), passed, detail });
    }

    fn fail(&mut self, name: impl Into<String>, e: impl std::fmt::Display) {
        self.push(name, false, format!("error: {e}"));
    }

    /// |actual − expected| ≤ tol · scale.
    fn close(&mut self, name: impl Into<String>, actual: f64, expected: f64, tol: f64) {
        let err = (actual - expected).abs();
        let pass = err <= tol * self.opts.tol_scale;
        self.push(name, pass, format!("{actual:.15} vs {expected:.15}, |diff| {err:.3e}, tol {tol:.1e}"));
    }

    fn close_res(&mut self, name: impl Into<String>, actual: crate::Result<f64>, expected: f64, tol: f64) {
        match actual {
            Ok(a) => self.close(name, a, expected, tol),
            Err(e) => self.fail(name, e),
        }
    }

    /// Relative agreement.
    fn rel(&mut self, name: impl Into<String>, actual: f64, expected: f64, tol: f64) {
        let err = ((actual - expected) / expected).abs();
        let pass = err <= tol * self.opts.tol_scale;
        self.push(name, pass, format!("{actual:.8} vs {expected:.8}, rel {err:.3e}, tol {tol:.1e}"));
    }

    /// Monte Carlo mean within `sigmas` standard errors.
    fn within_sigma(&mut self, name: impl Into<String>, mean: f64, stderr: f64, expected: f64, sigmas: f64) {
        let z = (mean - expected).abs() / stderr;
        let pass = z <= sigmas * self.opts.tol_scale;
        self.push(name, pass, format!("mean {mean:.6} ± {stderr:.2e} vs {expected:.6}, {z:.2} σ (limit {sigmas})"));
    }

    /// KS goodness of fit, rejected below p = 0.01.
    fn ks_pass(&mut self, name: impl Into<String>, d: f64, p: f64, n: usize) {
        let pass = p >= 0.01 / self.opts.tol_scale;
        self.push(name, pass, format!("D = {d:.5}, p = {p:.4}, n = {n}"));
    }

    fn truth(&mut self, name: impl Into<String>, ok: bool, detail: String) {
        let pass = ok && self.opts.tol_scale > 0.0;
        self.push(name, pass, detail);
    }
}

pub fn run_criterion(id: u8, opts: &VerifyOptions) -> CriterionReport {
    let t0 = Instant::now();
    let mut cx = Ctx::new(*opts, id);
    match id {
        1 => criterion_constants(&mut cx),
        2 => criterion_routes(&mut cx),
        3 => criterion_mc_means(&mut cx),
        4 => criterion_goodness_of_fit(&mut cx),
        5 => criterion_w_pipeline(&mut cx),
        6 => criterion_asymptotics(&mut cx),
        7 => criterion_properties(&mut cx),
        8 => criterion_figures(&mut cx),
        _ => cx.fail("criterion id", format!("no criterion {id}")),
    }
    CriterionReport { id, title: TITLES.get(id as usize - 1).copied().unwrap_or("unknown"), checks: cx.checks, seconds: t0.elapsed().as_secs_f64() }
}

pub fn run_all(opts: &VerifyOptions) -> Vec<CriterionReport> {
    (1..=8).map(|i| run_criterion(i, opts)).collect()
}

fn criterion_constants(cx: &mut Ctx) {
    let cfg = SeriesConfig::default();
    let tol = 1e-10;
    let f22 = 0.5 + 9.0 * PI * PI / 512.0;
    cx.close_res("<F>_{2,2} X route", mean_fidelity_nk(2, 2.0), f22, tol);
    cx.close_res("<F>_{2,2} series", moments_series_z(2, 2.0, 2, &cfg).map(|t| t.get(2).unwrap()), f22, tol);
    let f23 = 0.5 + (15.0 * 2f64.sqrt() * PI / 128.0).powi(2);
    cx.close_res("<F>_{2,3} X route", mean_fidelity_nk(2, 3.0), f23, tol);
    cx.close_res("<F>_{2,3} closed", mean_fidelity_2k(3.0), f23, tol);
    let fb = 0.5 + 8.0 / (9.0 * PI * PI);
    cx.close_res("<F>_Bures N=2 (K=3/2)", mean_fidelity_2k(1.5), fb, tol);
    cx.close_res("<F>_Bures N=2 series", moments_series_z(2, 1.5, 2, &cfg).map(|t| t.get(2).unwrap()), fb, tol);
    let f32 = 1.0 / 3.0 + 15.0 * (PI / 32.0).powi(2);
    cx.close_res("<F>_{3,2} series (K<N)", moment_root_fidelity_series(3, 2.0, 2, &cfg).map(|t| t.get(2).unwrap()), f32, tol);
    cx.close("<F>_{3,2} explicit K=2", mean_fidelity_n2_explicit(3.0), f32, tol);
    cx.close_res("<F>_{3,2} continued X route", mean_fidelity_nk(3, 2.0), f32, tol);
    cx.close_res("<sqrt F>_{2,1} series", moments_series_zk(2, 1, 1, &cfg).map(|t| t.get(1).unwrap()), 2.0 / 3.0, tol);
    cx.close_res("<sqrt F>_{2,1} X route", mean_root_fidelity_nk(2, 1.0), 2.0 / 3.0, tol);
    cx.close_res("<sqrt F>_{3,1} series", moments_series_zk(3, 1, 1, &cfg).map(|t| t.get(1).unwrap()), 8.0 / 15.0, tol);
    cx.close_res("<sqrt F>_{3,1} X route", mean_root_fidelity_nk(3, 1.0), 8.0 / 15.0, tol);
    cx.close_res("p_2 cloning exceedance", cloning_exceed_prob(2), 1.0 / 6.0, tol);
}

fn criterion_routes(cx: &mut Ctx) {
    let tol = 1e-9;
    let cfg = SeriesConfig::default();
    for k in 2..=10 {
        let k = k as f64;
        cx.close_res(format!("<sqrt F>_{{2,{k}}} X vs explicit"), mean_root_fidelity_nk(2, k), mean_root_fidelity_2k_explicit(k), tol);
        match mean_fidelity_2k(k) {
            Ok(e) => cx.close_res(format!("<F>_{{2,{k}}} X vs explicit"), mean_fidelity_nk(2, k), e, tol),
            Err(e) => cx.fail(format!("<F>_{{2,{k}}} explicit"), e),
        }
    }
    for k in 3..=11 {
        let k = k as f64;
        cx.close_res(format!("<sqrt F>_{{3,{k}}} X vs explicit"), mean_root_fidelity_nk(3, k), mean_root_fidelity_3k_explicit(k), tol);
        cx.close_res(format!("<F>_{{3,{k}}} X vs explicit"), mean_fidelity_nk(3, k), mean_fidelity_3k_explicit(k), tol);
    }
    for (n, k) in [(2usize, 2usize), (3, 3), (3, 4), (4, 4), (4, 2), (5, 2)] {
        match moment_root_fidelity_series(n, k as f64, 2, &cfg) {
            Ok(t) => {
                cx.close_res(format!("<sqrt F>_{{{n},{k}}} X vs series"), mean_root_fidelity_nk(n, k as f64), t.get(1).unwrap(), tol);
                cx.close_res(format!("<F>_{{{n},{k}}} X vs series"), mean_fidelity_nk(n, k as f64), t.get(2).unwrap(), tol);
            }
            Err(e) => cx.fail(format!("series ({n},{k})"), e),
        }
    }
    for n in 3..=6 {
        match moment_root_fidelity_series(n, 2.0, 2, &cfg) {
            Ok(t) => {
                cx.close(format!("<sqrt F>_{{{n},2}} explicit vs series"), mean_root_fidelity_n2_explicit(n as f64), t.get(1).unwrap(), tol);
                cx.close(format!("<F>_{{{n},2}} explicit vs series"), mean_fidelity_n2_explicit(n as f64), t.get(2).unwrap(), tol);
            }
            Err(e) => cx.fail(format!("series ({n},2)"), e),
        }
    }
}

fn mc_mean(cx: &mut Ctx, name: String, spec: ExperimentSpec, expected: f64) {
    match run_experiment(&spec) {
        Ok(r) => cx.within_sigma(name, r.mean, r.stderr, expected, 4.0),
        Err(e) => cx.fail(name, e),
    }
}

fn criterion_mc_means(cx: &mut Ctx) {
    let n_s = cx.samples(100_000, 20_000);
    for (n, k) in [(2usize, 2usize), (2, 3), (2, 4), (3, 2), (3, 3), (4, 4)] {
        let Ok(exact) = mean_fidelity_nk(n, k as f64) else {
            cx.fail(format!("analytic <F>_{{{n},{k}}}"), "unavailable");
            continue;
        };
        let seed = cx.seed();
        mc_mean(cx, format!("symmetric induced ({n},{k})"), ExperimentSpec::symmetric(MeasureSpec::Induced { n, k }, n_s, seed, Statistic::Fidelity), exact);
    }
    let seed = cx.seed();
    mc_mean(cx, "symmetric Bures N=2".into(), ExperimentSpec::symmetric(MeasureSpec::Bures { n: 2 }, n_s, seed, Statistic::Fidelity), 0.5 + 8.0 / (9.0 * PI * PI));
    for n in 2..=4 {
        let seed = cx.seed();
        mc_mean(cx, format!("symmetric FS N={n}"), ExperimentSpec::symmetric(MeasureSpec::FubiniStudyPure { n }, n_s, seed, Statistic::Fidelity), 1.0 / n as f64);
    }
    for (n, k) in [(2usize, 2usize), (3, 5), (4, 2)] {
        let seed = cx.seed();
        mc_mean(cx, format!("purity ({n},{k})"), ExperimentSpec::symmetric(MeasureSpec::Induced { n, k }, n_s, seed, Statistic::Purity), mean_purity(n, k as f64));
    }
}

fn ks_case<C: Fn(f64) -> f64>(cx: &mut Ctx, name: String, a: MeasureSpec, b: MeasureSpec, n_s: usize, cdf: C) {
    let seed = cx.seed();
    match run_experiment(&ExperimentSpec::new(a, b, n_s, seed, Statistic::Fidelity)).and_then(|r| ks_statistic(&r.samples, cdf)) {
        Ok(k) => cx.ks_pass(name, k.d, k.p_value, k.n),
        Err(e) => cx.fail(name, e),
    }
}

fn table_cdf<P: Fn(f64) -> crate::Result<f64>>(pdf: P) -> crate::Result<impl Fn(f64) -> f64> {
    let t = crate::curve::TabulatedCdf::from_pdf(pdf, 0.0, 1.0, 400)?;
    Ok(move |f| t.cdf(f))
}

fn ks_pdf_case<P: Fn(f64) -> crate::Result<f64>>(cx: &mut Ctx, name: String, a: MeasureSpec, b: MeasureSpec, n_s: usize, pdf: P) {
    match table_cdf(pdf) {
        Ok(cdf) => ks_case(cx, name, a, b, n_s, cdf),
        Err(e) => cx.fail(name, e),
    }
}

fn criterion_goodness_of_fit(cx: &mut Ctx) {
    let n_s = cx.samples(100_000, 20_000);
    for n in [2usize, 4] {
        let fs = MeasureSpec::FubiniStudyPure { n };
        ks_pdf_case(cx, format!("pure-pure N={n}"), fs, fs, n_s, move |f| pdf_pure_pure(n, f));
    }
    for (n, k) in [(2usize, 2usize), (3, 3)] {
        let fs = MeasureSpec::FubiniStudyPure { n };
        ks_pdf_case(cx, format!("pure-induced ({n},{k})"), fs, MeasureSpec::Induced { n, k }, n_s, move |f| pdf_pure_induced(n, k as f64, f));
    }
    let b2 = MeasureSpec::Bures { n: 2 };
    ks_pdf_case(cx, "symmetric one-qubit K=3/2 (Bures)".into(), b2, b2, n_s, |f| pdf_fidelity_2k_closed(f, 1.5));
    let hs2 = MeasureSpec::Induced { n: 2, k: 2 };
    ks_pdf_case(cx, "symmetric one-qubit K=2 (HS)".into(), hs2, hs2, n_s, |f| pdf_fidelity_2k_closed(f, 2.0));
    ks_case(cx, "rebit pure vs real induced K=2 (uniform)".into(), MeasureSpec::RealInduced { n: 2, k: 1 }, MeasureSpec::RealInduced { n: 2, k: 2 }, n_s, |f| {
        f.clamp(0.0, 1.0)
    });
    let quad = QuadConfig::default().with_tol(1e-12, 1e-10);
    ks_pdf_case(cx, "pure vs Bures N=3 (quadrature vs MCMC)".into(), MeasureSpec::FubiniStudyPure { n: 3 }, MeasureSpec::Bures { n: 3 }, n_s, move |f| {
        pdf_pure_bures(3, f, &quad)
    });
}

fn criterion_w_pipeline(cx: &mut Ctx) {
    let grid = midpoint_grid(50);
    for k in [2usize, 3] {
        match WPipelineState::new(2, k, WConfig::default()) {
            Ok(st) => {
                let mut worst: f64 = 0.0;
                let mut err = None;
                for &f in &grid {
                    match (st.pdf(f), pdf_fidelity_2k_closed(f, k as f64)) {
                        (Ok(a), Ok(b)) => worst = worst.max((a - b).abs()),
                        (Err(e), _) | (_, Err(e)) => err = Some(e),
                    }
                }
                match err {
                    Some(e) => cx.fail(format!("W (2,{k}) vs closed form"), e),
                    None => cx.close(format!("W (2,{k}) vs closed form, 50-point grid"), worst, 0.0, 1e-4),
                }
                match st.normalization() {
                    Ok(z) => cx.close(format!("W (2,{k}) normalization"), z, 1.0, 0.01),
                    Err(e) => cx.fail(format!("W (2,{k}) normalization"), e),
                }
            }
            Err(e) => cx.fail(format!("W (2,{k})"), e),
        }
    }
    match WPipelineState::new(3, 3, WConfig::default()) {
        Ok(st) => {
            cx.close_res("W (3,3) <sqrt F>", st.moment(1), mean_root_fidelity_nk(3, 3.0).unwrap_or(f64::NAN), 1e-3);
            cx.close_res("W (3,3) <F>", st.moment(2), mean_fidelity_nk(3, 3.0).unwrap_or(f64::NAN), 1e-3);
            cx.close_res("W (3,3) normalization", st.normalization(), 1.0, 0.01);
        }
        Err(e) => cx.fail("W (3,3)", e),
    }
}

fn criterion_asymptotics(cx: &mut Ctx) {
    let n_s = cx.samples(10_000, 2_000);
    let hs_const = 8.0 / (3.0 * PI);
    let seed = cx.seed();
    match run_experiment(&ExperimentSpec::symmetric(MeasureSpec::HilbertSchmidt { n: 64 }, n_s, seed, Statistic::MaxMixedRootFidelity)) {
        Ok(r) => cx.rel("HS N=64 <Tr sqrt(rho)>/sqrt(N) vs 8/(3 pi)", r.mean, hs_const, 0.015),
        Err(e) => cx.fail("HS N=64", e),
    }
    cx.close("HS constant from trace moments", asymptotic_trace_moment(0.5, AsymptoticMeasure::HilbertSchmidt), hs_const, 1e-12);
    let b_const = asymptotic_trace_moment(0.5, AsymptoticMeasure::Bures);
    cx.close("Bures constant ~ 0.787", b_const, 0.787, 5e-4);
    // distance to the limit shrinks with N
    let bn = cx.samples(20_000, 4_000);
    let mut vals = Vec::new();
    for n in 2..=6 {
        let seed = cx.seed();
        match run_experiment(&ExperimentSpec::symmetric(MeasureSpec::Bures { n }, bn, seed, Statistic::MaxMixedRootFidelity)) {
            Ok(r) => vals.push((n, r.mean, r.stderr)),
            Err(e) => cx.fail(format!("Bures N={n}"), e),
        }
    }
    if vals.len() == 5 {
        let dist: Vec<f64> = vals.iter().map(|v| v.1 - b_const).collect();
        let monotone = dist.windows(2).all(|w| w[1] < w[0]) && dist.iter().all(|&d| d > 0.0);
        let detail = vals.iter().map(|(n, m, s)| format!("N={n}: {m:.5}±{s:.1e}")).collect::<Vec<_>>().join(", ");
        cx.truth("Bures <Tr sqrt(rho)>/sqrt(N) decreases toward 0.787", monotone, detail);
    }
    // large-K qubit law near its mode
    let k = 10.0;
    let grid: Vec<f64> = (1..2000).map(|i| i as f64 / 2000.0).collect();
    let exact: Vec<f64> = grid.iter().map(|&f| pdf_fidelity_2k_closed(f, k).unwrap_or(f64::NAN)).collect();
    let peak = exact.iter().cloned().fold(0.0, f64::max);
    let mut worst: f64 = 0.0;
    for (&f, &e) in grid.iter().zip(&exact) {
        if e >= 0.5 * peak {
            match pdf_fidelity_2k_asymptotic(f, k) {
                Ok(a) => worst = worst.max(((a - e) / e).abs()),
                Err(_) => worst = f64::INFINITY,
            }
        }
    }
    cx.close("K=10 asymptotic qubit law vs exact (half-max region, relative)", worst, 0.0, 0.10);
}

fn criterion_properties(cx: &mut Ctx) {
    let cfg = BuresMcmcConfig::default();
    let seed = cx.seed();
    let mut rng = RngStream::new(seed, 0).rng();
    let mut worst: [f64; 6] = [0.0; 6];
    let mut failures = 0;
    for trial in 0..200 {
        let n = 2 + trial % 3;
        let (a, b) = match (sample_hs(n, &mut rng), sample_measure(&MeasureSpec::Induced { n, k: 1 + trial % 4 }, &mut rng, &cfg)) {
            (Ok(a), Ok(b)) => (a, b),
            _ => {
                failures += 1;
                continue;
            }
        };
        let u = haar_unitary(n, &mut rng);
        let (Ok(fab), Ok(fba), Ok(faa)) = (fidelity(&a, &b), fidelity(&b, &a), fidelity(&a, &a)) else {
            failures += 1;
            continue;
        };
        worst[0] = worst[0].max((fab - fba).abs());
        worst[1] = worst[1].max((faa - 1.0).abs());
        if let (Ok(ua), Ok(ub)) = (a.conjugate(&u), b.conjugate(&u)) {
            worst[2] = worst[2].max((fidelity(&ua, &ub).unwrap_or(f64::NAN) - fab).abs());
        }
        if n == 2 {
            worst[3] = worst[3].max((fidelity_n2(&a, &b).unwrap_or(f64::NAN) - fab).abs());
            if let (Ok(ta), Ok(tb)) = (BlochVector::from_state(&a), BlochVector::from_state(&b)) {
                let tr = 0.5 + ta.dot(&tb);
                let prod = (a.matrix() * b.matrix()).trace().re;
                worst[4] = worst[4].max((tr - prod).abs());
            }
        }
        let rf = root_fidelity(&a, &b).unwrap_or(f64::NAN);
        let d = bures_distance(&a, &b).unwrap_or(f64::NAN);
        let ang = bures_angle(&a, &b).unwrap_or(f64::NAN);
        worst[5] = worst[5].max((d * d - 2.0 * (1.0 - rf)).abs()).max((ang.cos() - rf).abs());
        if !(0.0..=1.0 + 1e-12).contains(&fab) {
            failures += 1;
        }
    }
    let names = ["fidelity symmetric", "F(rho, rho) = 1", "unitary invariance", "qubit formula", "Tr rho1 rho2 = 1/2 + tau1.tau2", "Bures distance and angle"];
    for (nm, w) in names.iter().zip(worst) {
        cx.close(format!("metric identity: {nm}"), w, 0.0, 1e-9);
    }
    cx.truth("metric checks ran without errors", failures == 0, format!("{failures} failures"));

    // sampler determinism
    let same = |m: MeasureSpec| -> bool {
        let a = sample_measure(&m, &mut RngStream::new(seed, 42).rng(), &cfg);
        let b = sample_measure(&m, &mut RngStream::new(seed, 42).rng(), &cfg);
        matches!((a, b), (Ok(x), Ok(y)) if x.matrix() == y.matrix())
    };
    for m in [MeasureSpec::Induced { n: 3, k: 2 }, MeasureSpec::Bures { n: 2 }, MeasureSpec::Bures { n: 3 }, MeasureSpec::RealInduced { n: 3, k: 3 }] {
        cx.truth(format!("sampler determinism {}", m.label()), same(m), String::new());
    }
    let a = ExperimentSpec::symmetric(MeasureSpec::Bures { n: 3 }, 1500, seed, Statistic::Fidelity);
    let r1 = rayon::ThreadPoolBuilder::new().num_threads(1).build().map(|p| p.install(|| run_experiment(&a)));
    let r2 = rayon::ThreadPoolBuilder::new().num_threads(3).build().map(|p| p.install(|| run_experiment(&a)));
    let same_runs = matches!((r1, r2), (Ok(Ok(x)), Ok(Ok(y))) if x.samples == y.samples && serde_json::to_string(&x).ok() == serde_json::to_string(&y).ok());
    cx.truth("experiment independent of thread count", same_runs, String::new());

    // monotone in K, and F <= sqrt F on average
    let mut mono = true;
    let mut jensen = true;
    let mut detail = String::new();
    for n in 2..=5 {
        let mut prev = 0.0;
        for k in 1..=10 {
            let t = moment_root_fidelity_series(n, k as f64, 2, &SeriesConfig::default());
            let Ok(t) = t else {
                mono = false;
                detail = format!("series failed at ({n},{k})");
                continue;
            };
            let (m1, m2) = (t.get(1).unwrap(), t.get(2).unwrap());
            if m2 <= prev {
                mono = false;
                detail = format!("<F> not increasing at ({n},{k})");
            }
            if !(m2 <= m1 && m1 * m1 <= m2) {
                jensen = false;
                detail = format!("Jensen fails at ({n},{k})");
            }
            prev = m2;
        }
    }
    cx.truth("<F>_{N,K} increasing in K (N=2..5, K=1..10)", mono, detail.clone());
    cx.truth("<sqrt F>^2 <= <F> <= <sqrt F>", jensen, detail);

    // normalization of every density
    let q = QuadConfig::default().with_tol(1e-12, 1e-10).with_substitution(EndpointSubstitution::SqrtSingularity);
    let mut pdfs: Vec<(String, Box<dyn Fn(f64) -> crate::Result<f64>>)> = Vec::new();
    for n in 2..=4 {
        pdfs.push((format!("pure-pure N={n}"), Box::new(move |f| pdf_pure_pure(n, f))));
        pdfs.push((format!("pure-HS N={n}"), Box::new(move |f| pdf_pure_hs(n, f))));
        pdfs.push((format!("pure-induced N={n} K=2.5"), Box::new(move |f| pdf_pure_induced(n, 2.5, f))));
        pdfs.push((format!("pure-real-induced N={n} K=3"), Box::new(move |f| pdf_pure_real_induced(n, 3.0, f))));
        pdfs.push((format!("pure-Bures N={n}"), Box::new(move |f| pdf_pure_bures(n, f, &QuadConfig::default().with_tol(1e-12, 1e-10)))));
    }
    for k in [1.5, 2.0, 3.0, 4.5] {
        pdfs.push((format!("symmetric qubit K={k} closed"), Box::new(move |f| pdf_fidelity_2k_closed(f, k))));
    }
    for k in [1.25, 2.7] {
        pdfs.push((format!("symmetric qubit K={k} integral"), Box::new(move |f| pdf_fidelity_2k_integral(f, k, &QuadConfig::default().with_tol(1e-12, 1e-10)))));
    }
    for (name, p) in pdfs {
        let mut err = None;
        let r = integrate(
            |f| {
                if f <= 0.0 || f >= 1.0 {
                    return 0.0;
                }
                p(f).unwrap_or_else(|e| {
                    err = Some(e);
                    0.0
                })
            },
            0.0,
            1.0,
            &q,
        );
        match (r, err) {
            (Ok(v), None) => cx.close(format!("normalization {name}"), v.value, 1.0, 1e-3),
            (Err(e), _) | (_, Some(e)) => cx.fail(format!("normalization {name}"), e),
        }
    }
    for (n, k) in [(3usize, 3usize), (3, 4)] {
        match WPipelineState::new(n, k, WConfig::default()).and_then(|s| s.normalization()) {
            Ok(z) => cx.close(format!("normalization W ({n},{k}) before rescaling"), z, 1.0, 1e-3),
            Err(e) => cx.fail(format!("normalization W ({n},{k})"), e),
        }
    }
}

fn dist_case(cx: &mut Ctx, name: String, family: Family, n: usize, k: Option<f64>, n_s: usize) {
    let seed = cx.seed();
    match dist_output(family, n, k, 50, Some(n_s), seed) {
        Ok(d) => {
            let mass_ok = d.histogram.as_ref().map(|h| (h.pdf.iter().sum::<f64>() / h.len() as f64 - 1.0).abs() < 1e-9).unwrap_or(false);
            match (d.ks, d.curve.is_some()) {
                (Some(ks), true) if mass_ok => cx.ks_pass(name, ks.d, ks.p_value, ks.n),
                _ => cx.fail(name, "missing curve, histogram or KS statistic"),
            }
        }
        Err(CliError::Usage(m)) => cx.fail(name, m),
        Err(CliError::Compute(e)) => cx.fail(name, e),
    }
}

fn criterion_figures(cx: &mut Ctx) {
    let n_s = cx.samples(100_000, 10_000);
    // pure vs HS and pure vs Bures curves, N = 2..4
    for n in 2..=4 {
        dist_case(cx, format!("curve pure-HS N={n}"), Family::PureHs, n, None, n_s);
        dist_case(cx, format!("curve pure-Bures N={n}"), Family::PureBures, n, None, n_s);
    }
    // <F>_{N,K} table with MC points
    let ns: Vec<f64> = (2..=6).map(|v| v as f64).collect();
    let ks: Vec<f64> = (1..=8).map(|v| v as f64).collect();
    let t_s = cx.samples(20_000, 2_000);
    let seed = cx.seed();
    let rows_a = mean_rows(&ns, &ks, MethodArg::Series, StatisticArg::F, t_s, seed);
    let rows_m = mean_rows(&ns, &ks, MethodArg::Mc, StatisticArg::F, t_s, seed);
    match (rows_a, rows_m) {
        (Ok(a), Ok(m)) if a.len() == 40 && m.len() == 40 => {
            let mut worst: f64 = 0.0;
            let mut at = (0, 0.0);
            for (x, y) in a.iter().zip(&m) {
                let z = (x.value - y.value).abs() / y.error;
                if z > worst {
                    worst = z;
                    at = (x.n, x.k);
                }
            }
            cx.push(
                "mean table table N=2..6, K=1..8: MC within 4 sigma",
                worst <= 4.0 * cx.opts.tol_scale,
                format!("worst {worst:.2} sigma at (N,K)=({},{})", at.0, at.1),
            );
            let diag: Vec<f64> = (2..=6).map(|n| a.iter().find(|r| r.n == n && r.k == n as f64).map(|r| r.value).unwrap_or(f64::NAN)).collect();
            cx.truth("mean table K=N diagonal decreases in N", diag.windows(2).all(|w| w[1] < w[0]), format!("{diag:.4?}"));
            let p32 = a.iter().find(|r| r.n == 3 && r.k == 2.0).map(|r| r.value).unwrap_or(f64::NAN);
            cx.close("mean table (3,2) point = 0.4779", p32, 0.4779, 5e-5);
        }
        (Err(CliError::Usage(e)), _) | (_, Err(CliError::Usage(e))) => cx.fail("mean table table", e),
        (Err(CliError::Compute(e)), _) | (_, Err(CliError::Compute(e))) => cx.fail("mean table table", e),
        _ => cx.fail("mean table table", "wrong row count"),
    }
    // symmetric distributions, N = 3, 4, K = 1..4
    for n in [3usize, 4] {
        for k in 1..=4usize {
            let name = format!("symmetric curve symmetric ({n},{k})");
            if k == 1 || k >= n {
                dist_case(cx, name, Family::SymNk, n, Some(k as f64), n_s);
                continue;
            }
            // no curve below K = N: the overlay is checked through its moments
            let seed = cx.seed();
            let d = dist_output(Family::SymNk, n, Some(k as f64), 50, Some(n_s), seed);
            let hist_ok = matches!(&d, Ok(o) if o.curve.is_none() && o.histogram.is_some());
            let (a, b) = match family_measures(Family::SymNk, n, Some(k as f64)) {
                Ok(p) => p,
                Err(_) => {
                    cx.fail(name, "measures");
                    continue;
                }
            };
            let r = run_experiment(&ExperimentSpec::new(a, b, n_s, seed, Statistic::Fidelity));
            let t = moment_root_fidelity_series(n, k as f64, 4, &SeriesConfig::default());
            match (r, t) {
                (Ok(r), Ok(t)) if hist_ok => {
                    for m in [1usize, 2] {
                        let est = r.moments[m - 1];
                        let exact = t.get(2 * m as u32).unwrap();
                        cx.within_sigma(format!("{name} histogram moment <F^{m}>"), est.value, est.jackknife_error, exact, 4.0);
                    }
                }
                _ => cx.fail(name, "overlay or series failed"),
            }
        }
    }
    // reference lookups for every panel exist where promised
    for n in 2..=4 {
        let ok = reference(Family::PureBures, n, None).map(|r| r.is_some()).unwrap_or(false);
        cx.truth(format!("curve pure-Bures N={n} curve available"), ok, String::new());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_pass_and_zero_scale_fails() {
        let ok = run_criterion(1, &VerifyOptions::default());
        assert!(ok.passed(), "{:?}", ok.checks.iter().filter(|c| !c.passed).collect::<Vec<_>>());
        let bad = run_criterion(1, &VerifyOptions { tol_scale: 0.0, ..Default::default() });
        assert!(!bad.passed());
    }
}
