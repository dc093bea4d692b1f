//! Trajectory-level properties of the Euler–Maruyama engine.

use monitored_qubit::rng::derive_seed;
use monitored_qubit::sde::*;
use monitored_qubit::{BlochVector, ComplexMatrix2, DensityMatrix, LindbladChannel, ModelSpec};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn state(x: f64, y: f64, z: f64) -> DensityMatrix {
    DensityMatrix::from_bloch(BlochVector::new(x, y, z).unwrap()).unwrap()
}

fn random_interior(rng: &mut ChaCha8Rng) -> DensityMatrix {
    loop {
        let v = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        if v[0] * v[0] + v[1] * v[1] + v[2] * v[2] < 0.95 {
            return state(v[0], v[1], v[2]);
        }
    }
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

#[test]
fn every_step_stays_in_the_ball() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for p in Preset::ALL {
        let model = preset(p, 0.8).unwrap();
        let rho0 = random_interior(&mut rng);
        let ens = simulate_ensemble(&model, &rho0, DEFAULT_DT, 1.0, 100, 5).unwrap();
        for t in &ens.trajectories {
            assert_eq!(t.points.len(), 10_001);
            for pt in &t.points {
                assert!(pt.state.norm() <= 1.0 + 1e-12, "{}: |v| = {}", p.name(), pt.state.norm());
            }
        }
    }
}

#[test]
fn identical_inputs_give_identical_bytes() {
    let model = preset(Preset::HeN, 0.24).unwrap();
    let rho0 = state(0.3, -0.1, 0.4);
    let a = serde_json::to_string(&simulate_trajectory(&model, &rho0, 1e-3, 0.5, 42).unwrap()).unwrap();
    let b = serde_json::to_string(&simulate_trajectory(&model, &rho0, 1e-3, 0.5, 42).unwrap()).unwrap();
    assert_eq!(a, b);
    let c = serde_json::to_string(&simulate_trajectory(&model, &rho0, 1e-3, 0.5, 43).unwrap()).unwrap();
    assert_ne!(a, c);
}

#[test]
fn single_member_ensemble_is_the_derived_seed_trajectory() {
    let model = preset(Preset::HoN, 0.5).unwrap();
    let rho0 = state(0.1, 0.2, 0.3);
    let ens = simulate_ensemble(&model, &rho0, 1e-3, 0.3, 1, 99).unwrap();
    let t = simulate_trajectory(&model, &rho0, 1e-3, 0.3, derive_seed(99, 0)).unwrap();
    assert_eq!(ens.trajectories[0], t);
}

#[test]
fn ensemble_is_independent_of_scheduling() {
    let model = preset(Preset::HeH, 0.5).unwrap();
    let rho0 = state(0.2, 0.2, 0.2);
    let a = simulate_ensemble(&model, &rho0, 1e-3, 0.2, 16, 3).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let b = pool.install(|| simulate_ensemble(&model, &rho0, 1e-3, 0.2, 16, 3).unwrap());
    assert_eq!(a, b);
}

#[test]
fn axis_start_stays_on_the_axis_under_qnd_homodyne() {
    let model = preset(Preset::HoH, 0.7).unwrap();
    for seed in 0..5 {
        let t = simulate_trajectory(&model, &state(0.0, 0.0, 0.4), 1e-4, 1.0, seed).unwrap();
        assert!(t.points.iter().all(|p| p.state.r() == 0.0));
    }
}

#[test]
fn pure_start_approaches_purity_as_dt_shrinks() {
    // The exact dynamics keep a pure state pure; each Euler step leaves a
    // defect |G|²(ΔW² − dt), so the worst defect along a path falls like √dt.
    let model = preset(Preset::HeN, 1.0).unwrap();
    let rho0 = DensityMatrix::from_bloch(BlochVector::from_cylindrical(0.6, 0.4, 0.8)).unwrap();
    let defect = |dt: f64| {
        let ens = simulate_ensemble(&model, &rho0, dt, 0.1, 32, 1).unwrap();
        let worst = |t: &Trajectory| t.points.iter().map(|p| (1.0 - p.state.norm_sqr()).abs()).fold(0.0, f64::max);
        ens.trajectories.iter().map(worst).sum::<f64>() / 32.0
    };
    let (d4, d5, d6) = (defect(1e-4), defect(1e-5), defect(1e-6));
    for (a, b) in [(d4, d5), (d5, d6)] {
        let ratio = a / b;
        assert!((10f64.sqrt() / 1.5..10f64.sqrt() * 1.5).contains(&ratio), "{d4:e} {d5:e} {d6:e}");
    }
    assert!(d6 < 3e-3, "{d6:e}");
}

#[test]
fn poles_never_move() {
    let cases = [
        (Preset::HeH, 1.0),
        (Preset::HeH, -1.0),
        (Preset::HoH, 1.0),
        (Preset::HoH, -1.0),
        (Preset::HeN, -1.0),
        (Preset::HoN, -1.0),
    ];
    for (p, z) in cases {
        for eta in [0.3, 1.0] {
            let t = simulate_trajectory(&preset(p, eta).unwrap(), &state(0.0, 0.0, z), 1e-3, 1.0, 8).unwrap();
            assert!(t.points.iter().all(|q| q.state == BlochVector::new(0.0, 0.0, z).unwrap()), "{} z = {z}", p.name());
        }
    }
}

#[test]
fn qnd_heterodyne_mean_of_z_is_constant() {
    let rho0 = state(0.3, 0.1, 0.35);
    for eta in [0.3, 1.0] {
        let ens = simulate_ensemble_with(&preset(Preset::HeH, eta).unwrap(), &rho0, 1e-3, 0.5, 4000, 17, SimOptions::endpoints()).unwrap();
        let zs: Vec<f64> = ens.final_states().iter().map(|v| v.z).collect();
        let (m, se) = mean_and_se(&zs);
        assert!((m - 0.35).abs() <= 3.0 * se, "η = {eta}: {m} ± {se}");
    }
}

#[test]
fn fluorescence_homodyne_mean_of_z_decays() {
    let z0 = 0.5;
    let rho0 = state(0.4, -0.2, z0);
    let model = preset(Preset::HoN, 0.6).unwrap();
    let ens = simulate_ensemble_with(&model, &rho0, 1e-3, 1.0, 4000, 23, SimOptions { record_stride: 250, substeps: 1 }).unwrap();
    for k in 1..ens.trajectories[0].points.len() {
        let t = ens.trajectories[0].points[k].time;
        let zs: Vec<f64> = ens.trajectories.iter().map(|tr| tr.points[k].state.z).collect();
        let (m, se) = mean_and_se(&zs);
        let expected = (z0 + 1.0) * (-t).exp() - 1.0;
        assert!((m - expected).abs() <= 3.0 * se, "t = {t}: {m} ± {se} vs {expected}");
    }
}

#[test]
fn strong_error_scales_as_root_dt() {
    let model = preset(Preset::HoH, 0.8).unwrap();
    let rho0 = state(0.5, 0.2, 0.3);
    let horizon = 0.5;
    let dts = [4e-3, 1e-3, 2.5e-4];
    let mut scaled = Vec::new();
    for dt in dts {
        let mut err = 0.0;
        let n = 200;
        for i in 0..n {
            let seed = derive_seed(5, i);
            let coarse = simulate_trajectory_with(&model, &rho0, dt, horizon, seed, SimOptions { record_stride: usize::MAX, substeps: 16 }).unwrap();
            let fine = simulate_trajectory_with(&model, &rho0, dt / 16.0, horizon, seed, SimOptions::endpoints()).unwrap();
            let (a, b) = (coarse.last().state, fine.last().state);
            err += ((a.x - b.x).powi(2) + (a.y - b.y).powi(2) + (a.z - b.z).powi(2)).sqrt();
        }
        scaled.push(err / n as f64 / dt.sqrt());
    }
    let hi = scaled.iter().cloned().fold(0.0, f64::max);
    let lo = scaled.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(hi / lo <= 2.0, "error/√dt = {scaled:?}");
}

/// One step of the cylindrical QND-heterodyne equations
/// `dr = −(4−2η)r dt − 2rz√η dW¹`, `dz = 2(1−z²)√η dW¹`, `dθ = −2√η dW²`.
/// The θ sign matches the engine's channel order (σ_z, iσ_z).
fn cylindrical_step(r: f64, theta: f64, z: f64, eta: f64, dt: f64, dw: [f64; 2]) -> (f64, f64, f64) {
    let s = eta.sqrt();
    (r - (4.0 - 2.0 * eta) * r * dt - 2.0 * r * z * s * dw[0], theta - 2.0 * s * dw[1], z + 2.0 * (1.0 - z * z) * s * dw[0])
}

#[test]
fn cartesian_and_cylindrical_steps_agree_after_the_ito_correction() {
    // Two-point increments ±√dt make (ΔW^k)² = dt exact. In r and z the two
    // noise directions do not mix, so those coordinates agree pathwise up to
    // O(dt^{3/2}). The azimuth picks up a cross term ΔW¹ΔW² = ±dt, which
    // cancels in the average over the four sign pairs; that average then
    // agrees up to O(dt²), while a missing Itô drift would leave O(dt).
    let eta = 0.7;
    let model = preset(Preset::HeH, eta).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let starts: Vec<(f64, f64, f64)> = (0..20).map(|_| (rng.random_range(0.2..0.6), rng.random_range(-3.0..3.0), rng.random_range(-0.7..0.7))).collect();
    let discrepancies = |dt: f64| {
        let (mut pathwise, mut averaged): (f64, f64) = (0.0, 0.0);
        for &(r, theta, z) in &starts {
            let rho = DensityMatrix::from_bloch(BlochVector::from_cylindrical(r, theta, z)).unwrap();
            let mut mean = [0.0; 3];
            for signs in [[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]] {
                let dw = [signs[0] * dt.sqrt(), signs[1] * dt.sqrt()];
                let out = step_ito(&model, &rho, dt, &NoiseDraw::new(dw.to_vec())).unwrap().rho.bloch();
                let (r1, t1, z1) = cylindrical_step(r, theta, z, eta, dt, dw);
                pathwise = pathwise.max((out.r() - r1).abs()).max((out.z - z1).abs());
                let c = BlochVector::from_cylindrical(r1, t1, z1);
                for (m, d) in mean.iter_mut().zip([out.x - c.x, out.y - c.y, out.z - c.z]) {
                    *m += d / 4.0;
                }
            }
            averaged = averaged.max(mean.iter().map(|m| m * m).sum::<f64>().sqrt());
        }
        (pathwise, averaged)
    };
    let ((p3, a3), (p4, a4)) = (discrepancies(1e-3), discrepancies(1e-4));
    // 10^{3/2} ≈ 31.6 per decade, i.e. √10 relative to the O(dt) step.
    assert!((20.0..50.0).contains(&(p3 / p4)), "pathwise {p3:e} / {p4:e}");
    assert!((60.0..160.0).contains(&(a3 / a4)), "averaged {a3:e} / {a4:e}");
}

fn matrix_strategy() -> impl Strategy<Value = ComplexMatrix2> {
    proptest::array::uniform8(-1.0f64..1.0).prop_map(|a| ComplexMatrix2::from_parts([[a[0], a[1]], [a[2], a[3]]], [[a[4], a[5]], [a[6], a[7]]]))
}

fn model_strategy() -> impl Strategy<Value = ModelSpec> {
    (proptest::collection::vec((matrix_strategy(), 0.0f64..=1.0), 1..4), proptest::array::uniform3(-1.0f64..1.0)).prop_map(|(chs, h)| {
        let hamiltonian = ComplexMatrix2::sigma_x().scale_re(h[0]) + ComplexMatrix2::sigma_y().scale_re(h[1]) + ComplexMatrix2::sigma_z().scale_re(h[2]);
        let channels = chs.into_iter().map(|(l, eta)| LindbladChannel::new(l, eta).unwrap()).collect();
        ModelSpec::new(hamiltonian, channels).unwrap()
    })
}

fn ball_point() -> impl Strategy<Value = BlochVector> {
    (0.0f64..=1.0, -3.2f64..3.2, -1.0f64..=1.0).prop_map(|(rad, th, u)| BlochVector::from_latitude(u.asin(), th, rad))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn steps_of_random_models_stay_in_the_ball(model in model_strategy(), v in ball_point(), seed in 0u64..1000) {
        let rho0 = DensityMatrix::from_bloch(v).unwrap();
        let t = simulate_trajectory(&model, &rho0, 1e-3, 0.2, seed).unwrap();
        for p in &t.points {
            prop_assert!(p.state.norm() <= 1.0 + 1e-12);
            prop_assert_eq!(p.records.len(), model.channels.len());
        }
        let again = simulate_trajectory(&model, &rho0, 1e-3, 0.2, seed).unwrap();
        prop_assert_eq!(t, again);
    }

    #[test]
    fn rotated_channel_gives_the_same_drift(l in matrix_strategy(), v in ball_point(), phase in -3.2f64..3.2) {
        // With zero noise only the drift acts, and F is invariant under L → e^{iφ}L.
        let rho = DensityMatrix::from_bloch(v).unwrap();
        let a = ModelSpec::from_pairs(&[(l, 0.5)]).unwrap();
        let b = ModelSpec::from_pairs(&[(l.scale(Complex64::from_polar(1.0, phase)), 0.5)]).unwrap();
        let sa = step_ito(&a, &rho, 1e-3, &NoiseDraw::zeros(1)).unwrap().rho.bloch();
        let sb = step_ito(&b, &rho, 1e-3, &NoiseDraw::zeros(1)).unwrap().rho.bloch();
        prop_assert!((sa.x - sb.x).abs() < 1e-14 && (sa.y - sb.y).abs() < 1e-14 && (sa.z - sb.z).abs() < 1e-14);
    }
}
