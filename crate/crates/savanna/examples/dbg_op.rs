use savanna::blocks::{op_simulate, OpConfig};
fn main() {
    for (width, cap, reps) in [(10usize, 30_000_000u64, 60usize), (20, 2_000_000, 40)] {
        let mut cfg = OpConfig::new(width, 0.95);
        cfg.horizon = cap;
        let t0 = std::time::Instant::now();
        let mut s = op_simulate(&cfg, reps, 3).unwrap();
        s.sort_unstable();
        let censored = s.iter().filter(|&&t| t == cap).count();
        println!(
            "width {width}: median {} (cap {cap}, censored {censored}/{reps}, min {}, {:.1}s)",
            s[s.len() / 2], s[0], t0.elapsed().as_secs_f64()
        );
    }
    // The same medians near criticality, where scaling is resolvable.
    for p in [0.75, 0.8] {
        print!("p={p}: medians");
        for width in [10usize, 20, 40] {
            let mut cfg = OpConfig::new(width, p);
            cfg.horizon = 1_000_000;
            let mut s = op_simulate(&cfg, 500, 3).unwrap();
            s.sort_unstable();
            print!(" {}", s[s.len() / 2]);
        }
        println!();
    }
}
