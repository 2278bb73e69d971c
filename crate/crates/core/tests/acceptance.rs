//! Acceptance suite. Run with `cargo test -p qface --test acceptance -- --nocapture`
//! to see one PASS/FAIL line per criterion.

use std::time::Instant;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;

use qface::archive::{decode_model, encode_model, load_model, save_model, SavedModel};
use qface::baseline::{grayscale_samples, train_2dpca};
use qface::dataset::synth::{synth_dataset, SynthSpec};
use qface::dataset::{LabeledSample, TrainingSet};
use qface::eig::{eigenvalues, heig};
use qface::harness::{
    accuracy_csv, accuracy_sweep, predictions_csv, reconstruction_csv, reconstruction_sweep, Method, RRange,
};
use qface::model::{
    class_decomposition, class_max_eigenvalues, covariance_relaxed, covariance_total, relaxation_vector,
    total_scatter, train, train_with_report,
};
use qface::recognize::project;
use qface::reconstruct::{orthonormal_complement, reconstruct, reconstruction_ratio};
use qface::testutil::{projector_distance, random_hermitian, random_orthonormal, random_psd, random_qmatrix, rng};
use qface::toy::{toy_case, toy_table, ToySpec};
use qface::{Mode, QMatrix};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

/// Complex adjoint built entry by entry, independent of the library's embedding.
fn adjoint_oracle(g: &QMatrix) -> DMatrix<Complex64> {
    let n = g.rows();
    DMatrix::from_fn(2 * n, 2 * n, |r, c| {
        let q = g.get(r % n, c % n);
        let a = Complex64::new(q.w, q.x);
        let b = Complex64::new(q.y, q.z);
        match (r < n, c < n) {
            (true, true) => a,
            (true, false) => b,
            (false, true) => -b.conj(),
            (false, false) => a.conj(),
        }
    })
}

fn eigensolver_oracle() -> Check {
    let start = Instant::now();
    let mut rng = rng(1001);
    let (mut worst_val, mut worst_res, mut worst_orth) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..200 {
        let n = 1 + i % 8;
        let g = random_hermitian(&mut rng, n);
        let e = ok(heig(&g))?;
        let mut oracle: Vec<f64> = SymmetricEigen::new(adjoint_oracle(&g)).eigenvalues.iter().copied().collect();
        oracle.sort_by(|a, b| b.total_cmp(a));
        let dedup: Vec<f64> = oracle.iter().step_by(2).copied().collect();
        let scale = dedup.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        for (a, b) in e.values.iter().zip(&dedup) {
            worst_val = worst_val.max((a - b).abs() / scale);
        }
        let gf = g.fro_norm();
        for (k, &lambda) in e.values.iter().enumerate() {
            let v = e.vectors.column(k);
            let gv = ok(g.mul_vec(&v))?;
            let res: f64 = gv.iter().zip(&v).map(|(x, y)| (*x - *y * lambda).norm_sqr()).sum::<f64>().sqrt();
            worst_res = worst_res.max(res / gf);
        }
        worst_orth = worst_orth.max(e.vectors.orthonormality_residual());
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(worst_val <= 1e-10, || format!("eigenvalue mismatch {worst_val:e}"))?;
    ensure(worst_res <= 1e-8, || format!("residual {worst_res:e}"))?;
    ensure(worst_orth <= 1e-10, || format!("V*V - I = {worst_orth:e}"))?;
    ensure(secs < 10.0, || format!("took {secs:.2} s"))?;
    Ok(format!(
        "rel eig err {worst_val:.1e}, residual {worst_res:.1e}, orth {worst_orth:.1e}, {secs:.2} s"
    ))
}

fn four_by_five() -> qface::dataset::Dataset {
    let spec: SynthSpec = "classes=4,per=5,w=10,h=12,noise=12,gap=30,hetero=0.4".parse().unwrap();
    synth_dataset(&spec, 1002).unwrap()
}

fn residual_identity() -> Check {
    let start = Instant::now();
    let ds = four_by_five();
    let full = ok(train(&ds.train, 10, Mode::Sr2dcpca))?;
    let mut worst = 0.0f64;
    for r in 1..=10 {
        let m = ok(full.truncate(r))?;
        let perp = ok(orthonormal_complement(m.projection()))?;
        for s in ds.train.samples() {
            let centered = ok(s.image.sub(m.mean()))?;
            let p = ok(project(&s.image, &m))?;
            let lhs = ok(ok(p.matmul(&m.projection().conj_transpose()))?.sub(&centered))?.fro_norm();
            let rhs = ok(centered.matmul(&perp))?.fro_norm();
            worst = worst.max((lhs - rhs).abs() / centered.fro_norm());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(worst <= 1e-9, || format!("relative gap {worst:e}"))?;
    ensure(secs < 5.0, || format!("took {secs:.2} s"))?;
    Ok(format!("max relative gap {worst:.1e} over r=1..10, 20 samples, {secs:.2} s"))
}

fn reconstruction_ratio_checks() -> Check {
    let ds = four_by_five();
    let (mut worst_full, mut worst_drop) = (0.0f64, 0.0f64);
    for mode in [Mode::Sr2dcpca, Mode::Twodcpca] {
        let full = ok(train(&ds.train, 10, mode))?;
        for s in ds.train.samples() {
            let mut last = f64::NEG_INFINITY;
            for r in 1..=10 {
                let m = ok(full.truncate(r))?;
                let rec = ok(reconstruct(&ok(project(&s.image, &m))?, &m))?;
                let ratio = ok(reconstruction_ratio(&s.image, &rec, m.mean()))?;
                worst_drop = worst_drop.max(last - ratio);
                last = ratio;
            }
            worst_full = worst_full.max((last - 1.0).abs());
        }
    }
    ensure(worst_full <= 1e-8, || format!("|ratio - 1| at r = n is {worst_full:e}"))?;
    ensure(worst_drop <= 1e-12, || format!("ratio decreased by {worst_drop:e}"))?;
    Ok(format!("|ratio - 1| at r = n {worst_full:.1e}, largest decrease {:.1e}", worst_drop.max(0.0)))
}

fn random_set(rng: &mut impl Rng, singleton: bool) -> TrainingSet {
    let (m, n) = (rng.random_range(2..6), rng.random_range(2..7));
    let l = rng.random_range(3..9);
    let samples = (0..l)
        .map(|s| {
            let label = if singleton { format!("s{s}") } else { format!("c{}", s % 2) };
            LabeledSample::new(random_qmatrix(rng, m, n), label, format!("x{s}")).unwrap()
        })
        .collect();
    TrainingSet::new(samples).unwrap()
}

fn singleton_degeneration() -> Check {
    let mut rng = rng(1004);
    let (mut worst_g, mut worst_p) = (0.0f64, 0.0f64);
    for _ in 0..20 {
        let t = random_set(&mut rng, true);
        let w = ok(relaxation_vector(&ok(class_max_eigenvalues(&t))?))?;
        let g_w = ok(covariance_relaxed(&t, &w))?;
        let g_t = covariance_total(&t);
        worst_g = worst_g.max(ok(g_w.max_abs_diff(&g_t))?);
        let n = t.dims().1;
        let r = rng.random_range(1..=n);
        let sr = ok(train(&t, r, Mode::Sr2dcpca))?;
        let plain = ok(train(&t, r, Mode::Twodcpca))?;
        worst_p = worst_p.max(projector_distance(sr.projection(), plain.projection()));
    }
    ensure(worst_g <= 1e-12, || format!("|G_w - G_t| = {worst_g:e}"))?;
    ensure(worst_p <= 1e-8, || format!("projector distance {worst_p:e}"))?;
    Ok(format!("max |G_w - G_t| {worst_g:.1e}, projector distance {worst_p:.1e}, 20 sets"))
}

fn relaxation_checks() -> Check {
    let mut rng = rng(1005);
    let mut worst_sum = 0.0f64;
    for i in 0..1000 {
        let k = 1 + i % 12;
        let top = [1.0, 1e2, 1e4][i % 3];
        let lambda: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..top)).collect();
        let w = ok(relaxation_vector(&lambda))?;
        ensure(w.weights().iter().all(|v| v.is_finite() && *v > 0.0), || format!("bad weights for {lambda:?}"))?;
        worst_sum = worst_sum.max((w.weights().iter().sum::<f64>() - 1.0).abs());
    }
    let mut worst_uniform = 0.0f64;
    for k in 1..=12 {
        for v in [0.0, 3.5, 1e4] {
            let w = ok(relaxation_vector(&vec![v; k]))?;
            for x in w.weights() {
                worst_uniform = worst_uniform.max((x - 1.0 / k as f64).abs());
            }
        }
    }
    let extreme = ok(relaxation_vector(&[1e4, 0.0, 9_999.0]))?;
    ensure(extreme.weights().iter().all(|v| v.is_finite()), || "overflow at 1e4".into())?;
    ensure(worst_sum <= 1e-12, || format!("|sum w - 1| = {worst_sum:e}"))?;
    ensure(worst_uniform <= 1e-12, || format!("uniform deviation {worst_uniform:e}"))?;
    Ok(format!("|sum w - 1| {worst_sum:.1e}, uniform deviation {worst_uniform:.1e}, finite at 1e4"))
}

fn sorted_eigenvalues(g: &QMatrix) -> Result<Vec<f64>, String> {
    ok(eigenvalues(g))
}

fn perturbation_bounds() -> Check {
    let mut rng = rng(1006);
    let mut worst_lemma = f64::NEG_INFINITY;
    for _ in 0..200 {
        let n = rng.random_range(1..=6);
        let (k, cols) = (rng.random_range(1..=n + 2), rng.random_range(1..=4));
        let a = random_psd(&mut rng, n, k);
        let x = random_qmatrix(&mut rng, n, cols);
        let rho = rng.random_range(0.01..2.0);
        let b = ok(a.add(&x.matmul(&x.conj_transpose()).unwrap().scale(rho)))?;
        let bound = rho * x.spectral_norm().powi(2);
        let (la, lb) = (sorted_eigenvalues(&a)?, sorted_eigenvalues(&b)?);
        for (p, q) in la.iter().zip(&lb) {
            worst_lemma = worst_lemma.max((q - p).abs() - bound);
        }
    }
    ensure(worst_lemma <= 1e-10, || format!("eigenvalue shift exceeds bound by {worst_lemma:e}"))?;

    let mut worst_low = f64::NEG_INFINITY;
    let mut worst_high = f64::NEG_INFINITY;
    for i in 0..100 {
        let classes = 2 + i % 3;
        let spec = SynthSpec {
            classes,
            per_class: 2 + i % 4,
            test_per_class: 0,
            width: 3 + i % 4,
            height: 3 + i % 3,
            noise: 5.0 + i as f64,
            gap: 10.0,
            heterogeneity: 0.5,
        };
        // Unequal class sizes: drop samples from the later classes.
        let ds = ok(synth_dataset(&spec, 2000 + i as u64))?;
        let per = spec.per_class;
        let keep: Vec<LabeledSample> = ds
            .train
            .samples()
            .iter()
            .enumerate()
            .filter(|(s, _)| (s / per).is_multiple_of(2) || s % per + 1 < per)
            .map(|(_, s)| s.clone())
            .collect();
        let t = ok(TrainingSet::new(keep))?;
        let (_, rep) = ok(train_with_report(&t, 1, Mode::Sr2dcpca))?;
        let w = ok(relaxation_vector(&rep.lambda_max))?;
        let b = i % classes;
        let (a_mat, x, _) = ok(class_decomposition(&t, &w, b))?;
        let ell = t.len() as f64;
        let n = t.dims().1;
        let r = 1 + i % n;
        let eps: f64 = rep.spectrum[..r].iter().sum::<f64>() / ell;
        let la: f64 = sorted_eigenvalues(&a_mat)?[..r].iter().sum::<f64>() / ell;
        let slack = r as f64 * w.weights()[b] / ell * x.spectral_norm().powi(2);
        worst_low = worst_low.max(la - eps);
        worst_high = worst_high.max(eps - (la + slack));
    }
    ensure(worst_low <= 1e-10, || format!("lower variance bound violated by {worst_low:e}"))?;
    ensure(worst_high <= 1e-10, || format!("upper variance bound violated by {worst_high:e}"))?;
    Ok(format!(
        "largest excess over bound: eigenvalue shift {worst_lemma:.1e}, variance low {worst_low:.1e}, high {worst_high:.1e}"
    ))
}

fn subspace_optimality() -> Check {
    let ds = four_by_five();
    let mut rng = rng(1007);
    let (mut worst, mut frames) = (f64::INFINITY, 0);
    for r in [1, 3, 6] {
        let (m, rep) = ok(train_with_report(&ds.train, r, Mode::Sr2dcpca))?;
        let best = ok(total_scatter(m.projection(), &rep.covariance))?;
        for _ in 0..100 {
            let v = random_orthonormal(&mut rng, 10, r);
            let other = ok(total_scatter(&v, &rep.covariance))?;
            worst = worst.min(best - other);
            frames += 1;
        }
    }
    ensure(worst >= -1e-10, || format!("a random frame beat the eigenfaces by {:e}", -worst))?;
    Ok(format!("{frames} random frames, smallest margin {worst:.3e}"))
}

fn recognition() -> Check {
    let start = Instant::now();
    let spec: SynthSpec = "classes=6,per=4,test=3,w=10,h=12,noise=2,gap=40".parse().unwrap();
    let ds = ok(synth_dataset(&spec, 1008))?;
    for method in Method::ALL {
        let reps = ok(accuracy_sweep(&ds.train, &ds.test, method, RRange { start: 3, end: 10 }))?;
        for rep in &reps {
            ensure(rep.accuracy == 1.0, || format!("{method} at r={} reached {}", rep.r, rep.accuracy))?;
        }
    }

    let spec: SynthSpec = "classes=6,per=5,test=5,w=10,h=12,noise=20,gap=20,hetero=0.5".parse().unwrap();
    let mut means = [0.0f64; 2];
    let mut top_weight = 0.0f64;
    for seed in 1..=5 {
        let ds = ok(synth_dataset(&spec, seed))?;
        let (sr, _) = ok(train_with_report(&ds.train, 1, Mode::Sr2dcpca))?;
        top_weight = top_weight.max(sr.relaxation().weights().iter().copied().fold(0.0, f64::max));
        for (k, mode) in [Mode::Sr2dcpca, Mode::Twodcpca].into_iter().enumerate() {
            let reps = ok(accuracy_sweep(&ds.train, &ds.test, Method::Color(mode), RRange { start: 1, end: 10 }))?;
            means[k] += reps.iter().map(|r| r.accuracy).sum::<f64>() / reps.len() as f64 / 5.0;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let detail = format!(
        "separable 100% for all methods at r=3..10; overlapping mean SR {:.2}% vs 2DCPCA {:.2}% \
         (largest relaxation weight {top_weight:.4}), {secs:.1} s",
        100.0 * means[0],
        100.0 * means[1]
    );
    ensure(means[0] >= means[1] - 0.01, || detail.clone())?;
    ensure(secs < 60.0, || format!("took {secs:.1} s"))?;
    Ok(detail)
}

fn toy_variance() -> Check {
    let spec = ToySpec::default();
    let mut wins = 0;
    for seed in 1..=5 {
        let c = ok(toy_case(&spec, seed))?;
        ensure(c.train_variance_2dcpca >= c.train_variance_sr - 1e-10, || {
            format!("seed {seed}: SR training variance exceeds 2DCPCA")
        })?;
        if c.whole_variance_sr >= c.whole_variance_2dcpca {
            wins += 1;
        }
    }
    ensure(wins >= 3, || format!("SR whole-set variance larger on only {wins}/5 seeds"))?;
    Ok(format!("SR whole-set variance larger on {wins}/5 seeds, 2DCPCA training variance larger on 5/5"))
}

fn primary_csvs(threads: usize) -> Vec<String> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    pool.install(|| {
        let spec: SynthSpec = "classes=4,per=4,test=3,w=8,h=9,noise=15,gap=15,hetero=0.5".parse().unwrap();
        let ds = synth_dataset(&spec, 1010).unwrap();
        let mut out = Vec::new();
        for method in Method::ALL {
            let reps = accuracy_sweep(&ds.train, &ds.test, method, RRange { start: 1, end: 8 }).unwrap();
            out.push(accuracy_csv(&reps));
            out.push(predictions_csv(&reps));
        }
        let rec = reconstruction_sweep(&ds.train, Mode::Sr2dcpca, RRange { start: 1, end: 8 }).unwrap();
        out.push(reconstruction_csv(&ds.train, &rec));
        let toy: Vec<_> = (1..=3).map(|s| toy_case(&ToySpec::default(), s).unwrap()).collect();
        out.push(toy_table(&toy));
        out
    })
}

fn determinism_and_serialization() -> Check {
    let a = primary_csvs(1);
    ensure(a == primary_csvs(1), || "repeated run differs".into())?;
    ensure(a == primary_csvs(4), || "1-thread and 4-thread runs differ".into())?;

    let ds = four_by_five();
    let dir = ok(tempfile::tempdir())?;
    let bits = |m: &QMatrix| m.planes().iter().flatten().map(|v| v.to_bits()).collect::<Vec<_>>();
    for mode in [Mode::Sr2dcpca, Mode::Twodcpca] {
        let m = ok(train(&ds.train, 6, mode))?;
        let path = dir.path().join(format!("{mode}.qfm"));
        ok(save_model(&path, &SavedModel::Color(m.clone())))?;
        let back = match ok(load_model(&path))? {
            SavedModel::Color(b) => b,
            SavedModel::Gray(_) => return Err("kind changed".into()),
        };
        ensure(bits(back.mean()) == bits(m.mean()) && bits(back.projection()) == bits(m.projection()), || {
            format!("{mode} planes differ after reload")
        })?;
        ensure(back == m, || format!("{mode} metadata differs after reload"))?;
    }
    let gray = ok(train_2dpca(&grayscale_samples(ds.train.samples()), 5))?;
    let saved = SavedModel::Gray(gray);
    let bytes = ok(encode_model(&saved))?;
    ensure(ok(decode_model(&bytes))? == saved, || "2dpca model differs after reload".into())?;
    ensure(ok(encode_model(&ok(decode_model(&bytes))?))? == bytes, || "re-encoding changed bytes".into())?;
    Ok(format!("{} primary CSVs byte-identical across runs and thread counts; 3 models bit-exact", a.len()))
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 10] = [
        ("eigensolver matches adjoint oracle", eigensolver_oracle),
        ("reconstruction residual equals complement energy", residual_identity),
        ("reconstruction ratio full at r = n and monotone", reconstruction_ratio_checks),
        ("singleton labels reduce to 2DCPCA", singleton_degeneration),
        ("relaxation vector normalized and stable", relaxation_checks),
        ("eigenvalue and variance perturbation bounds", perturbation_bounds),
        ("eigenfaces maximize total scatter", subspace_optimality),
        ("end-to-end recognition", recognition),
        ("toy example variance ordering", toy_variance),
        ("determinism and serialization", determinism_and_serialization),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{secs:.2} s]", i + 1),
            Err(why) => {
                println!("FAIL {:>2} {name}: {why} [{secs:.2} s]", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
