use ibart_core::bart::BartConfig;
use ibart_core::pan::{L0Options, PanConfig, Scheme};
use ibart_core::sim::{run_complex_suite, SimDesign};

fn main() {
    let design = SimDesign::complex(10, 20260808);
    let pan_cfg = PanConfig {
        scheme: Scheme::UnaryFirst,
        bart: BartConfig::desk(),
        l0: Some(L0Options { k: 4, tune_by_aic: true }),
        ..PanConfig::default()
    };
    let outcomes = run_complex_suite(&design, &pan_cfg).unwrap();
    let mut tp2 = 0;
    let mut f1s: Vec<f64> = Vec::new();
    for o in &outcomes {
        println!(
            "rep {}: TP={} FP={} F1={:.3} lasso(TP={} FP={}) spaces={:?} sel={:?}",
            o.replicate, o.metrics.true_positives, o.metrics.false_positives, o.metrics.f1,
            o.lasso_metrics.true_positives, o.lasso_metrics.false_positives,
            o.space_log, o.selected
        );
        tp2 += usize::from(o.metrics.true_positives == 2);
        f1s.push(o.metrics.f1);
    }
    f1s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    println!("tp2 = {tp2}/10, median F1 = {:.3}", 0.5 * (f1s[4] + f1s[5]));
}
