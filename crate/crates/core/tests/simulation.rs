use std::f64::consts::PI;

use bilateral::domain::{HourglassGrid, IntervalGrid};
use bilateral::kernel_hyp::{hyp_gains, hyp_kernel_explicit, HypPlant};
use bilateral::kernel_rd::{rd_gains, rd_kernel_explicit, RdPlant};
use bilateral::sim::{
    compatible_hyp_initial, compatible_wave_velocity, simulate_hyp, simulate_rd, simulate_wave, target_check, HypControl, RdControl, SimSettings,
    TargetSpec, WaveControl, WaveOptions,
};
use bilateral::wave::{wave_to_hyp, WavePlant};
use bilateral::domain::CoefficientProfile;
use bilateral::Error;

fn sine(grid: &IntervalGrid) -> Vec<f64> {
    let l = grid.half_length();
    grid.nodes().iter().map(|x| (PI * (x + l) / (2.0 * l)).sin()).collect()
}

#[test]
fn heat_mode_decay() {
    let grid = IntervalGrid::new(1.0, 201).unwrap();
    let plant = RdPlant::constant(1.0, 0.0, 1.0).unwrap();
    let s = SimSettings::new(Some(1e-3), 1.0);
    let t = simulate_rd(&plant, &grid, &RdControl::OpenLoop, &sine(&grid), &s).unwrap();
    let sm = t.summary();
    let expected = (-(PI / 2.0).powi(2)).exp();
    assert!((sm.growth_factor / expected - 1.0).abs() < 0.02, "{}", sm.growth_factor);
    t.verify().unwrap();
}

#[test]
fn rd_open_and_closed_loop() {
    let grid = IntervalGrid::new(1.0, 201).unwrap();
    let plant = RdPlant::constant(1.0, 12.0, 1.0).unwrap();
    let s = SimSettings::new(Some(1e-3), 2.0);
    let open = simulate_rd(&plant, &grid, &RdControl::OpenLoop, &sine(&grid), &s).unwrap();
    assert!(open.summary().grows);

    let k = rd_kernel_explicit(&plant, &HourglassGrid::new(grid)).unwrap();
    let (right, left) = rd_gains(&k).unwrap();
    let closed = simulate_rd(&plant, &grid, &RdControl::Feedback { right, left }, &sine(&grid), &s).unwrap();
    closed.verify().unwrap();
    let sm = closed.summary();
    assert!(sm.final_l2 < sm.initial_l2);
    let check = target_check(&closed, TargetSpec::Rd { plant: &plant, kernel: &k }).unwrap();
    assert!(check.max_boundary_residual < 1e-6, "{}", check.max_boundary_residual);
    let rate = check.decay_rate.unwrap();
    let oracle = PI * PI / 4.0;
    println!("closed-loop w decay rate {rate}, dyn residual {}", check.max_dynamics_residual);
    assert!((rate / oracle - 1.0).abs() < 0.1);
}

#[test]
fn zero_initial_state_stays_zero() {
    let grid = IntervalGrid::new(1.0, 41).unwrap();
    let plant = RdPlant::constant(1.0, 12.0, 1.0).unwrap();
    let k = rd_kernel_explicit(&plant, &HourglassGrid::new(grid)).unwrap();
    let (right, left) = rd_gains(&k).unwrap();
    let s = SimSettings::new(Some(1e-2), 0.5);
    let t = simulate_rd(&plant, &grid, &RdControl::Feedback { right, left }, &vec![0.0; 41], &s).unwrap();
    assert!(t.snapshots.iter().all(|f| f[0].iter().all(|&v| v == 0.0)));
    assert!(t.actuators.iter().all(|a| a == &[0.0, 0.0]));
}

#[test]
fn rd_divergence_reported() {
    let grid = IntervalGrid::new(1.0, 21).unwrap();
    let plant = RdPlant::constant(1.0, 39.0, 1.0).unwrap();
    let s = SimSettings::new(Some(0.05), 20.0);
    let r = simulate_rd(&plant, &grid, &RdControl::OpenLoop, &sine(&grid), &s);
    assert!(matches!(r, Err(Error::Divergence { .. })), "{r:?}");
}

#[test]
fn pure_transport_flushes_exactly() {
    let grid = IntervalGrid::new(1.0, 101).unwrap();
    let plant = HypPlant::constant(1.0, [0.0; 4], 1.0).unwrap();
    let u0 = sine(&grid);
    // zero at the inflow ends, so the flushed state is exactly zero at t = 2L
    let v0: Vec<f64> = grid.nodes().iter().map(|x| (1.0 - x) * x.cos()).collect();
    let s = SimSettings::new(None, 2.0);
    let t = simulate_hyp(&plant, &grid, &HypControl::OpenLoop, &u0, &v0, &s).unwrap();
    // exact shift after one step
    let one = &t.snapshots[1];
    for j in 1..101 {
        assert_eq!(one[0][j], u0[j - 1]);
        assert_eq!(one[1][j - 1], v0[j]);
    }
    let last = t.snapshots.last().unwrap();
    assert!(last.iter().all(|f| f.iter().all(|&v| v == 0.0)));
    assert!(matches!(
        simulate_hyp(&plant, &grid, &HypControl::OpenLoop, &u0, &v0, &SimSettings::new(Some(0.03), 1.0)),
        Err(Error::Config(_))
    ));
}

#[test]
fn hyp_closed_loop_finite_time() {
    let mut prev = f64::INFINITY;
    for n in [201, 401] {
        let grid = IntervalGrid::new(1.0, n).unwrap();
        let plant = HypPlant::constant(1.0, [0.0, 1.0, 1.0, 0.0], 1.0).unwrap();
        let k = hyp_kernel_explicit(&plant, &HourglassGrid::new(grid)).unwrap();
        let gains = hyp_gains(&k).unwrap();
        let u0 = sine(&grid);
        let v0: Vec<f64> = grid.nodes().iter().map(|x| 1.0 + x * x).collect();
        let (u0, v0) = compatible_hyp_initial(&gains, &grid, &u0, &v0).unwrap();
        let s = SimSettings::new(None, 2.1);
        let t = simulate_hyp(&plant, &grid, &HypControl::Feedback(gains), &u0, &v0, &s).unwrap();
        t.verify().unwrap();
        let sm = t.summary();
        let ratio = sm.final_sup / sm.initial_sup;
        println!("n = {n}: final/initial sup {ratio:e}");
        assert!(ratio < 1e-3);
        assert!(ratio < prev);
        prev = ratio;
        let check = target_check(&t, TargetSpec::Hyp { plant: &plant, kernel: &k }).unwrap();
        let i = check.times.iter().position(|&x| x >= 2.0).unwrap();
        assert!(check.transformed_sup[i..].iter().all(|&v| v < 1e-3 * check.transformed_sup[0]));
    }
}

#[test]
fn wave_open_loop_energy_grows_and_closed_loop_settles() {
    let grid = IntervalGrid::new(1.0, 201).unwrap();
    let plant = WavePlant::new(CoefficientProfile::constant(0.5), CoefficientProfile::constant(0.0), 1.0).unwrap();
    let nodes = grid.nodes();
    let u0: Vec<f64> = nodes.iter().map(|x| 0.2 * (PI * x).sin() + 0.1).collect();
    let ut0: Vec<f64> = nodes.iter().map(|x| (PI * x / 2.0).cos()).collect();
    let s = SimSettings::new(None, 2.0);
    let open = simulate_wave(&plant, &grid, &WaveControl::OpenLoop, &u0, &ut0, &s, WaveOptions::default()).unwrap();
    let e = open.wave_energy().unwrap();
    assert!(e.last().unwrap() > &e[0]);
    open.verify().unwrap();

    let (hyp, _) = wave_to_hyp(&plant).unwrap();
    let k = hyp_kernel_explicit(&hyp, &HourglassGrid::new(grid)).unwrap();
    let gains = hyp_gains(&k).unwrap();
    let ut0 = compatible_wave_velocity(&gains, &grid, &u0, &ut0).unwrap();
    let s = SimSettings::new(None, 3.0);
    let t = simulate_wave(&plant, &grid, &WaveControl::Feedback(gains), &u0, &ut0, &s, WaveOptions::default()).unwrap();
    t.verify().unwrap();
    let init = t.norms[0].sup;
    let idx = t.times.iter().position(|&x| x >= 2.1 - 1e-12).unwrap();
    let worst = t.norms[idx..].iter().map(|n| n.sup).fold(0.0, f64::max);
    println!("wave riemann ratio {:e}", worst / init);
    assert!(worst < 1e-3 * init);
}

#[test]
fn wave_zero_data_is_zero() {
    let grid = IntervalGrid::new(1.0, 41).unwrap();
    let plant = WavePlant::new(CoefficientProfile::constant(0.0), CoefficientProfile::constant(0.0), 1.0).unwrap();
    let z = vec![0.0; 41];
    let t = simulate_wave(&plant, &grid, &WaveControl::OpenLoop, &z, &z, &SimSettings::new(None, 1.0), WaveOptions::default()).unwrap();
    assert!(t.snapshots.iter().all(|f| f.iter().all(|c| c.iter().all(|&v| v == 0.0))));
}

#[test]
fn incompatible_data_still_settle_after_two_transits() {
    let grid = IntervalGrid::new(1.0, 201).unwrap();
    let plant = HypPlant::constant(1.0, [0.0, 1.0, 1.0, 0.0], 1.0).unwrap();
    let k = hyp_kernel_explicit(&plant, &HourglassGrid::new(grid)).unwrap();
    let gains = hyp_gains(&k).unwrap();
    let u0 = sine(&grid);
    let v0: Vec<f64> = grid.nodes().iter().map(|x| 1.0 + x * x).collect();
    let t = simulate_hyp(&plant, &grid, &HypControl::Feedback(gains), &u0, &v0, &SimSettings::new(None, 4.2)).unwrap();
    let sm = t.summary();
    assert!(sm.final_sup < 1e-3 * sm.initial_sup, "{}", sm.final_sup);
}

#[test]
fn compatible_data_satisfy_feedback_laws() {
    let grid = IntervalGrid::new(1.0, 51).unwrap();
    let plant = HypPlant::constant(1.0, [0.3, 1.0, 0.6, -0.2], 1.0).unwrap();
    let k = hyp_kernel_explicit(&plant, &HourglassGrid::new(grid)).unwrap();
    let g = hyp_gains(&k).unwrap();
    let u0: Vec<f64> = grid.nodes().iter().map(|x| x.sin() + 0.5).collect();
    let v0: Vec<f64> = grid.nodes().iter().map(|x| x * x - 0.3).collect();
    let (u, v) = compatible_hyp_initial(&g, &grid, &u0, &v0).unwrap();
    let u1 = g.u1_u.apply(&u) + g.u1_v.apply(&v);
    let u2 = g.u2_u.apply(&u) + g.u2_v.apply(&v);
    assert!((u1 - u[0]).abs() < 1e-12);
    assert!((u2 - v[50]).abs() < 1e-12);
}
