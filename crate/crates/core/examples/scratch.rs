use symsector::optimizer::*;
fn main() {
    let t = std::time::Instant::now();
    let c = OptimizerConfig::default();
    for (n, d) in [(2, 4), (3, 2), (3, 3), (3, 4)] {
        match minimize(n, d, &c) {
            Ok(r) => println!(
                "{n} {d} min={:.15} grid={:.6} evals={} {:?}",
                r.minimum,
                r.grid_minimum,
                r.evaluations,
                t.elapsed()
            ),
            Err(e) => println!("{n} {d} err {e}"),
        }
    }
    let r = minimize(
        4,
        2,
        &OptimizerConfig {
            grid_points: 21,
            ..c.clone()
        },
    )
    .unwrap();
    println!("4 2 generic(21) min={:.12} {:?}", r.minimum, t.elapsed());
    for f in [N4d2Form::Corrected, N4d2Form::AsPrinted] {
        let r = minimize_n4d2(f, &c).unwrap();
        println!(
            "{f:?} min={:.12} x24={:.8} coords={:?} dev={} {:?}",
            r.minimum,
            r.minimum * 24.0,
            r.coordinates,
            r.deviates_from_reference,
            t.elapsed()
        );
    }
}
