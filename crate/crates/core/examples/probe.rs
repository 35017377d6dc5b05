use lambda_coalescent::analysis::{correlation, mean_se};
use lambda_coalescent::measure::FiniteMeasure;
use lambda_coalescent::rng::par_replicates;
use lambda_coalescent::simulator::{simulate, simulate_counts, summarize, RateTable};

fn main() {
    // cross-engine check of the tracked pair (T1, T2): full vs counts
    let leb = FiniteMeasure::lebesgue();
    let n = 100usize;
    let table = RateTable::build(n, &leb).unwrap();
    let reps = 200_000u64;
    let full: Vec<(f64, f64)> = par_replicates(reps, 11, |_, rng| {
        let s = summarize(&simulate(n, &table, rng)).unwrap();
        (s.t1, s.t2)
    });
    let counts: Vec<(f64, f64)> = par_replicates(reps, 12, |_, rng| {
        let c = simulate_counts(n, &table, rng);
        (c.t1, c.t2)
    });
    let fp: Vec<f64> = full.iter().map(|s| s.0 * s.1).collect();
    let cp: Vec<f64> = counts.iter().map(|s| s.0 * s.1).collect();
    let (fm, fse) = mean_se(&fp);
    let (cm, cse) = mean_se(&cp);
    println!("full   E[T1 T2] = {fm:.5} +- {fse:.5}");
    println!("counts E[T1 T2] = {cm:.5} +- {cse:.5}");
    let f1: Vec<f64> = full.iter().map(|s| s.0).collect();
    let f2: Vec<f64> = full.iter().map(|s| s.1).collect();
    let c1: Vec<f64> = counts.iter().map(|s| s.0).collect();
    let c2: Vec<f64> = counts.iter().map(|s| s.1).collect();
    println!("full   rho = {:.4}", correlation(&f1, &f2));
    println!("counts rho = {:.4}", correlation(&c1, &c2));
    let (a, b) = mean_se(&f1);
    let (c, d) = mean_se(&c1);
    println!("full E[T1] = {a:.5} +- {b:.5}; counts E[T1] = {c:.5} +- {d:.5}");
}
