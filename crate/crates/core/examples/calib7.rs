use conegrowth_core::estimators::{check_condition_all, EvalCtx};
use conegrowth_core::models::{ModelSpec, WeightDist};
use conegrowth_core::{Budget, GroupSpec};

fn main() {
    let spec = GroupSpec::free_abelian(2);
    for (name, rates) in [
        ("exp(1) rates", WeightDist::Exponential { lambda: 1.0 }),
        ("uniform(0.5,1.5) rates", WeightDist::Uniform { lo: 0.5, hi: 1.5 }),
        ("constant 1 rates", WeightDist::Constant(1.0)),
    ] {
        let model = ModelSpec::RichardsonEnv { rates };
        let ctx = EvalCtx::new(&spec, &model, 2026)
            .with_margin(2.0)
            .with_budget(Budget::from_mb(256));
        for beta in [0.6, 0.8, 1.0, 1.3] {
            let grid = [1.0, 1.12, 1.25, 1.4, 1.6];
            let t0 = std::time::Instant::now();
            let rep = check_condition_all(&ctx, &[20], beta, &grid, 4000).unwrap();
            let r = &rep.per_radius[0];
            println!(
                "{name} beta={beta}: survival={:?} exceed={} exponent={:?} passed={} ({:?})",
                r.survival.iter().map(|s| (s * 1e4).round() / 1e4).collect::<Vec<_>>(),
                r.exceedances,
                r.fitted_exponent.map(|e| (e * 100.0).round() / 100.0),
                r.passed,
                t0.elapsed()
            );
        }
    }
}
