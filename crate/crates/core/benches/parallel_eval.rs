use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use graspforge_core::config::RunConfig;
use graspforge_core::ddpg::Agent;
use graspforge_core::par::Exec;
use graspforge_core::train::Task;

fn eval(c: &mut Criterion) {
    let mut cfg = RunConfig::default();
    cfg.agent.hidden = vec![64, 64, 64];
    cfg.episode.horizon = 100;
    let task = Task::new(&cfg).expect("default config is valid");
    let agent = Agent::new(cfg.agent.clone(), task.scene.obs_dim(), task.scene.n_action(), 0).expect("agent");
    let policy = agent.policy();
    let rot = cfg.episode.training_rotation();
    let mut group = c.benchmark_group("evaluate_16_episodes");
    group.sample_size(10);
    let mut modes = vec![("sequential", Exec::Sequential)];
    if Exec::parallel_available() {
        modes.push(("parallel", Exec::Parallel));
    }
    for (name, exec) in modes {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| task.evaluate(&policy, 0, 16, &rot, None, exec).expect("evaluation"))
        });
    }
    group.finish();
}

criterion_group!(benches, eval);
criterion_main!(benches);
