//! Independent oracles for the forward model, the naive inverse, the
//! calibration fit, component unmixing and the CSV codecs.

use fbgforce::calibration::{fit_axis, CalibrationModel, CalibrationRun, LoadAxis};
use fbgforce::classify::{LoadingClass, LoadingKind};
use fbgforce::ica::{decouple_pair, IcaConfig};
use fbgforce::io::{read_forces, read_frame, read_trajectory, write_forces, write_frame, write_trajectory};
use fbgforce::linalg::Mat2;
use fbgforce::pipeline::naive_forces;
use fbgforce::signal::{simulate_frame, ForceTrajectory, NoiseSpec, SensorPair, WavelengthFrame};
use proptest::prelude::*;

// Fitted matrices written out by hand in pm/N and pm, rows are sensors.
const K: [[f64; 2]; 2] = [[3.6, 0.09], [0.4, -4.2]];
const C: [[f64; 2]; 2] = [[1.6, 0.3], [0.6, -1.5]];
const OFFSETS: [f64; 4] = [7.1, -3.2, 2.5, -3.7];

/// Expected channel values for one sample of (F_x, F_y, F_z), written
/// without touching the library's geometry: with the default bend the
/// second frame sees `F_y + F_z / 4.1` along its y axis.
fn oracle_sample(fx: f64, fy: f64, fz: f64) -> [f64; 4] {
    let fy2 = fy + fz / 4.1;
    [
        K[0][0] * fx + K[0][1] * fy + OFFSETS[0],
        K[1][0] * fx + K[1][1] * fy + OFFSETS[1],
        C[0][0] * fx + C[0][1] * fy2 + OFFSETS[2],
        C[1][0] * fx + C[1][1] * fy2 + OFFSETS[3],
    ]
}

fn load() -> impl Strategy<Value = (f64, f64, f64)> {
    // inside the unit ball so the 1 N capacity holds
    (-0.57..0.57f64, -0.57..0.57f64, -0.57..0.57f64)
}

fn trajectory(samples: &[(f64, f64, f64)]) -> ForceTrajectory {
    ForceTrajectory::new(
        100.0,
        samples.iter().map(|s| s.0).collect(),
        samples.iter().map(|s| s.1).collect(),
        samples.iter().map(|s| s.2).collect(),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn noiseless_simulation_matches_forward_oracle(samples in prop::collection::vec(load(), 1..60)) {
        let calib = CalibrationModel::reference_fitted();
        let sim = simulate_frame(&trajectory(&samples), &calib, &NoiseSpec::noiseless()).unwrap();
        for (t, &(fx, fy, fz)) in samples.iter().enumerate() {
            let want = oracle_sample(fx, fy, fz);
            for (ch, w) in want.iter().enumerate() {
                prop_assert!((sim.frame.channel(ch)[t] - w).abs() < 1e-9, "ch {} t {}", ch, t);
            }
        }
    }

    #[test]
    fn naive_inverse_undoes_noiseless_simulation(samples in prop::collection::vec(load(), 1..60)) {
        let calib = CalibrationModel::reference_fitted();
        let sim = simulate_frame(&trajectory(&samples), &calib, &NoiseSpec::noiseless()).unwrap();
        let f = naive_forces(&sim.frame, &calib).unwrap();
        for (t, &(fx, fy, fz)) in samples.iter().enumerate() {
            prop_assert!((f.fx1[t] - fx).abs() < 1e-9);
            prop_assert!((f.fx2[t] - fx).abs() < 1e-9);
            prop_assert!((f.fy1[t] - fy).abs() < 1e-9);
            prop_assert!((f.fz[t] - fz).abs() < 1e-9);
        }
    }

    #[test]
    fn noiseless_run_fit_is_exact(
        slopes in prop::array::uniform4(-10.0..10.0f64),
        intercepts in prop::array::uniform4(-10.0..10.0f64),
        m in 3usize..40,
    ) {
        let loads: Vec<f64> = (0..m).map(|i| i as f64 / (m - 1) as f64).collect();
        let ch = std::array::from_fn(|s| loads.iter().map(|l| slopes[s] * l + intercepts[s]).collect());
        let run = CalibrationRun::new(LoadAxis::Y2, loads, WavelengthFrame::new(1.0, ch).unwrap()).unwrap();
        let fit = fit_axis(&run).unwrap();
        for s in 0..4 {
            prop_assert!((fit.sensors[s].slope - slopes[s]).abs() < 1e-9);
            prop_assert!((fit.sensors[s].intercept - intercepts[s]).abs() < 1e-9);
        }
    }

    // one row carries no sample rate, so the property starts at two
    #[test]
    fn frame_csv_round_trips(
        values in prop::collection::vec(prop::array::uniform4(-1e4..1e4f64), 2..50),
        rate in 1u32..20_000,
    ) {
        let ch = std::array::from_fn(|c| values.iter().map(|v| v[c]).collect());
        let frame = WavelengthFrame::new(f64::from(rate), ch).unwrap();
        let mut buf = Vec::new();
        write_frame(&mut buf, &frame).unwrap();
        prop_assert_eq!(read_frame(buf.as_slice()).unwrap(), frame);
    }

    #[test]
    fn trajectory_and_forces_csv_round_trip(samples in prop::collection::vec(load(), 2..50)) {
        let traj = trajectory(&samples);
        let mut buf = Vec::new();
        write_trajectory(&mut buf, &traj).unwrap();
        prop_assert_eq!(&read_trajectory(buf.as_slice()).unwrap(), &traj);

        let calib = CalibrationModel::reference_fitted();
        let sim = simulate_frame(&traj, &calib, &NoiseSpec::noiseless()).unwrap();
        let f = naive_forces(&sim.frame, &calib).unwrap();
        let mut buf = Vec::new();
        write_forces(&mut buf, &f).unwrap();
        prop_assert_eq!(read_forces(buf.as_slice()).unwrap(), f);
    }
}

#[test]
fn components_remix_to_the_channels() {
    // Two independent non-Gaussian sources through a known mixing.
    let n = 4000;
    let s0: Vec<f64> = (0..n).map(|i| ((i * 7919) % 1000) as f64 / 500.0 - 1.0).collect();
    let s1: Vec<f64> = (0..n).map(|i| ((i as f64) * 0.37).sin().powi(3)).collect();
    let offsets = [2.0, -1.0];
    let x0: Vec<f64> = (0..n).map(|i| s0[i] + 0.4 * s1[i] + offsets[0]).collect();
    let x1: Vec<f64> = (0..n).map(|i| 0.2 * s0[i] + s1[i] + offsets[1]).collect();
    let mixing = Mat2::new(1.0, 0.4, 0.2, 1.0);
    let calib = CalibrationModel::from_pm(mixing, mixing, [offsets[0], offsets[1], 0.0, 0.0], 1.0, 0.5, 1.0).unwrap();
    let class = LoadingClass {
        kind: LoadingKind::Multiaxial,
        r_squared: 0.0,
        pair: SensorPair::First,
        removed_bins: 3,
        degenerate: false,
    };
    let frame = WavelengthFrame::new(100.0, [x0.clone(), x1.clone(), vec![0.0; n], vec![0.0; n]]).unwrap();
    let pc = decouple_pair(&frame, SensorPair::First, &class, &calib, &IcaConfig::default().with_seed(3)).unwrap();

    assert_eq!((pc.w_re.get(0, 0), pc.w_re.get(1, 1)), (1.0, 1.0));
    let [c0, c1] = &pc.components;
    for t in 0..n {
        let back0 = pc.w_re.get(0, 0) * c0[t] + pc.w_re.get(0, 1) * c1[t] + offsets[0];
        let back1 = pc.w_re.get(1, 0) * c0[t] + pc.w_re.get(1, 1) * c1[t] + offsets[1];
        assert!((back0 - x0[t]).abs() < 1e-9 && (back1 - x1[t]).abs() < 1e-9, "t {t}");
    }
    // the estimated mixing lands near the true one
    assert!((pc.w_re.get(0, 1) - 0.4).abs() < 0.05, "{:?}", pc.w_re);
    assert!((pc.w_re.get(1, 0) - 0.2).abs() < 0.05, "{:?}", pc.w_re);
}
