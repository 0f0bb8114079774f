// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

use std::f64::consts::TAU;
use std::time::{Duration, Instant};

use beamnet::experiment::{
    find_row, mean_ci95, run_sweep, run_sweep_with, summarize, Metric, SweepPlan,
};
use beamnet::report::{read_records_csv, write_records_csv, write_summary_csv, RECORDS_HEADER};
use beamnet::rng::stream_rng;
use beamnet::{run_trial, MetricsRecord, Mode, TrialError, WorldConfig};
use proptest::prelude::*;
use rand::Rng;

fn small_plan() -> SweepPlan {
    SweepPlan {
        n_values: vec![20, 120],
        gradients: vec![3, 10],
        seeds: 4,
        ..SweepPlan::new(WorldConfig::default())
    }
}

fn csv_bytes(records: &[MetricsRecord]) -> Vec<u8> {
    let mut buf = Vec::new();
    write_records_csv(records, &mut buf).unwrap();
    buf
}

#[test]
fn parallel_sweep_matches_serial() {
    let plan = small_plan();
    let serial = run_sweep(&plan, 1);
    let parallel = run_sweep(&plan, 8);
    assert!(serial.failures.is_empty());
    assert_eq!(serial.records.len(), 16);
    assert_eq!(csv_bytes(&serial.records), csv_bytes(&parallel.records));
}

#[test]
fn sweep_collects_failures_without_aborting() {
    let plan = small_plan();
    let out = run_sweep_with(&plan, 4, |cfg| {
        if cfg.node_count == 20 {
            Err(TrialError::Config(beamnet::ConfigError::OutOfRange {
                key: "node_count",
                reason: "injected".into(),
            }))
        } else {
            run_trial(cfg)
        }
    });
    assert_eq!(out.records.len(), 8);
    assert_eq!(out.failures.len(), 8);
    assert!(out.failures.iter().all(|f| f.spec.n == 20 && f.reason.contains("injected")));
}

#[test]
fn sweep_trials_share_seeds_across_gradients() {
    let plan = small_plan();
    let specs = plan.trials();
    for a in &specs {
        for b in &specs {
            if a.n == b.n && a.seed_index == b.seed_index {
                assert_eq!(a.seed, b.seed);
            }
        }
    }
}

#[test]
fn student_t_interval_matches_tables() {
    // t(0.975, 2) = 4.302652729911275
    let (m, h) = mean_ci95(&[1.0, 2.0, 3.0]);
    assert_eq!(m, 2.0);
    assert!((h.unwrap() - 4.302652729911275 / 3f64.sqrt()).abs() < 1e-9);
    // t(0.975, 9) = 2.262157162740992, sd of 0..9 is sqrt(55/6).
    let xs: Vec<f64> = (0..10).map(f64::from).collect();
    let (_, h) = mean_ci95(&xs);
    assert!((h.unwrap() - 2.262157162740992 * (55.0f64 / 6.0).sqrt() / 10f64.sqrt()).abs() < 1e-9);
    assert_eq!(mean_ci95(&[4.0]), (4.0, None));
}

#[test]
fn interval_covers_the_true_mean_at_nominal_rate() {
    let mut rng = stream_rng(42, 0);
    let mut normal = move || {
        let (u1, u2): (f64, f64) = (1.0 - rng.random::<f64>(), rng.random());
        (-2.0 * u1.ln()).sqrt() * (TAU * u2).cos()
    };
    let hits = (0..100)
        .filter(|_| {
            let xs: Vec<f64> = (0..30).map(|_| 5.0 + 2.0 * normal()).collect();
            let (m, h) = mean_ci95(&xs);
            (m - 5.0).abs() <= h.unwrap()
        })
        .count();
    assert!(hits >= 90, "coverage {hits}/100");
}

#[test]
fn summary_groups_by_size_gradient_and_mode() {
    let plan = small_plan();
    let records = run_sweep(&plan, 4).records;
    for metric in Metric::ALL {
        let rows = summarize(&records, metric);
        assert_eq!(rows.len(), 8);
        for r in &rows {
            assert_eq!(r.sample_count, 4);
            let xs: Vec<f64> = records
                .iter()
                .filter(|x| x.n == r.n && x.gradient == r.gradient)
                .map(|x| x.value(metric, r.mode))
                .collect();
            assert!((r.mean - xs.iter().sum::<f64>() / 4.0).abs() < 1e-12);
        }
    }
    let rows = summarize(&records, Metric::UnidirectionalLinks);
    assert_eq!(find_row(&rows, 120, 3, Mode::Omni).unwrap().mean, 0.0);
    let mut buf = Vec::new();
    write_summary_csv(&rows, 10.0, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.lines().nth(1).unwrap().starts_with("unidirectional_links,20,0.2,3,"));
}

#[test]
fn records_file_has_two_rows_per_trial() {
    let r = run_trial(&WorldConfig { node_count: 60, ..WorldConfig::default() }).unwrap();
    let text = String::from_utf8(csv_bytes(&[r])).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], RECORDS_HEADER);
    assert_eq!(lines.len(), 3);
}

#[test]
fn large_trial_fits_the_budget() {
    let start = Instant::now();
    let r = run_trial(&WorldConfig { node_count: 400, gradient: 10, ..WorldConfig::default() }).unwrap();
    assert_eq!(r.n, 400);
    assert!(start.elapsed() < Duration::from_secs(30), "{:?}", start.elapsed());
}

fn record_strategy() -> impl Strategy<Value = MetricsRecord> {
    (
        (1usize..1000, 1u32..20, any::<u64>()),
        (0.0f64..50.0, 0.0f64..50.0, 0.0f64..=1.0, 0.0f64..=1.0),
        (1usize..500, 1usize..500, 0.0f64..=1.0, 0.0f64..=1.0, 0usize..1000),
    )
        .prop_map(|((n, gradient, seed), (ao, ad, co, cd), (k_o, k_d, fp, fc, u))| MetricsRecord {
            n,
            gradient,
            seed,
            apl_omni: ao,
            apl_dir: ad,
            cc_omni: co,
            cc_dir: cd,
            components_omni: k_o.max(k_d),
            components_dir: k_d.min(k_o),
            frac_peripheral: fp,
            frac_centroid: fc,
            unidirectional_links: u,
        })
}

proptest! {
    #[test]
    fn records_csv_round_trips(records in proptest::collection::vec(record_strategy(), 0..8)) {
        let back = read_records_csv(csv_bytes(&records).as_slice()).unwrap();
        prop_assert_eq!(back, records);
    }
}
