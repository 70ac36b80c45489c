//! Hot-path benchmarks: the two lateral-interaction routes, a single field
//! step, and a full trial of the bundled-scale three-layer model.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fieldplan_core::{
    field_step, kernel_row, lateral_interaction_direct, run_trial, Convolver, CouplingEdge,
    FieldGrid, FieldSpec, FieldState, GaussianBump, KernelParams, MemoryBinding, MemorySpec,
    Model, ModelSpec, NoiseSource, RunSettings, ScheduledInput, SigmoidParams, TrialSpec,
};
use std::hint::black_box;

const SIG: SigmoidParams = SigmoidParams {
    beta: 4.0,
    alpha: 0.0,
};

fn planning_kernel() -> KernelParams {
    KernelParams {
        c_excite: 22.0,
        sigma_excite: 1.0,
        c_inhibit: 15.0,
        sigma_inhibit: 2.75,
        c_global: 0.8,
    }
}

fn wavy_field(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 6.0 * (i as f64 * 0.119).sin() - 2.0)
        .collect()
}

fn bench_lateral_interaction(c: &mut Criterion) {
    let mut group = c.benchmark_group("lateral_interaction");
    for &n in &[401usize, 1601] {
        let grid = FieldGrid::new(-10.0, 10.0, n).unwrap();
        let kernel = planning_kernel();
        let row = kernel_row(&grid, &kernel);
        let mut conv = Convolver::new(&grid, &kernel).unwrap();
        let u = wavy_field(n);
        group.bench_with_input(BenchmarkId::new("direct", n), &n, |b, _| {
            b.iter(|| lateral_interaction_direct(black_box(&u), &row, &SIG, grid.dx()).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("fft", n), &n, |b, _| {
            b.iter(|| conv.interaction(black_box(&u), &SIG).to_vec())
        });
    }
    group.finish();
}

fn bench_field_step(c: &mut Criterion) {
    let grid = FieldGrid::new(-10.0, 10.0, 401).unwrap();
    let spec = FieldSpec {
        tau: 1.0,
        h: -5.0,
        q: 0.0,
        kernel: planning_kernel(),
        sigmoid: SIG,
    };
    let mut conv = Convolver::new(&grid, &spec.kernel).unwrap();
    let mut noise = NoiseSource::from_seed(0);
    let drive = wavy_field(401);
    c.bench_function("field_step_401", |b| {
        let mut state = FieldState::resting(&spec, &grid);
        b.iter(|| {
            field_step(
                black_box(&mut state),
                &spec,
                &mut conv,
                &drive,
                0.1,
                &mut noise,
            )
            .unwrap()
        })
    });
}

fn three_layer_model() -> (Model, TrialSpec, RunSettings) {
    let grid = FieldGrid::new(-10.0, 10.0, 401).unwrap();
    let mut spec = ModelSpec::default();
    spec.fields.insert(
        "perception".to_string(),
        FieldSpec {
            tau: 10.0,
            h: -5.0,
            q: 0.0,
            kernel: KernelParams {
                c_excite: 30.0,
                sigma_excite: 1.0,
                c_inhibit: 10.0,
                sigma_inhibit: 2.75,
                c_global: 0.5,
            },
            sigmoid: SIG,
        },
    );
    spec.fields.insert(
        "planning".to_string(),
        FieldSpec {
            tau: 1.0,
            h: -5.0,
            q: 0.0,
            kernel: planning_kernel(),
            sigmoid: SIG,
        },
    );
    spec.memories.insert(
        "memory".to_string(),
        MemoryBinding {
            spec: MemorySpec::new(
                300.0,
                3000.0,
                KernelParams {
                    c_excite: 2.0,
                    sigma_excite: 1.25,
                    c_inhibit: 0.0,
                    sigma_inhibit: 1.0,
                    c_global: 0.0,
                },
                SIG,
            )
            .unwrap(),
            source_field: "planning".to_string(),
        },
    );
    spec.edges.push(CouplingEdge {
        source: "perception".to_string(),
        target: "planning".to_string(),
        strength: 1.5,
    });
    spec.edges.push(CouplingEdge {
        source: "memory".to_string(),
        target: "planning".to_string(),
        strength: 2.5,
    });
    spec.gated_fields.insert("planning".to_string(), 0.0);
    let model = Model::new(spec, grid).unwrap();
    let trial = TrialSpec {
        label: "shadow".to_string(),
        inputs: vec![
            ScheduledInput {
                bump: GaussianBump {
                    amplitude: 8.5,
                    center: 1.0,
                    width: 1.0,
                },
                t_on: 0.0,
                t_off: 100.0,
                target_field: "perception".to_string(),
            },
            ScheduledInput {
                bump: GaussianBump {
                    amplitude: 17.0,
                    center: 3.0,
                    width: 1.25,
                },
                t_on: 100.0,
                t_off: 200.0,
                target_field: "planning".to_string(),
            },
        ],
        duration: 200.0,
        measure_window: (180.0, 200.0),
    };
    let settings = RunSettings::new(0.1, 0, "planning").unwrap();
    (model, trial, settings)
}

fn bench_shadow_trial(c: &mut Criterion) {
    let (mut model, trial, settings) = three_layer_model();
    let carry = model.fresh_memory();
    let mut group = c.benchmark_group("trial");
    group.sample_size(10);
    group.bench_function("three_layer_2000_steps", |b| {
        b.iter(|| run_trial(&mut model, &trial, &carry, &settings, 0).unwrap())
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_lateral_interaction,
    bench_field_step,
    bench_shadow_trial
);
criterion_main!(benches);
