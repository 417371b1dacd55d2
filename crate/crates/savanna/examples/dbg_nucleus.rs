use savanna::config::ModelSpec;
use savanna::ide::Coefficients;
use savanna::lattice::{InitialCondition, LatticeState};
fn main() {
    let (g, h) = ModelSpec::power(3.0, 0.5).build().unwrap();
    let coeffs = Coefficients::Constant { a: 13.0264, b: 1.0 };
    for half in [0.85, 0.9, 0.95, 1.0] {
        for density in [0.95, 1.0] {
            let mut alive = 0;
            for seed in 0..5u64 {
                let init = InitialCondition::Plateau {
                    inside: density, outside: 0.0, center: (2.0, 2.0), half_width: half,
                };
                let mut st = LatticeState::new(20, 4, g.clone(), h.clone(), &coeffs, &init, seed).unwrap();
                st.run(10.0, &[]).unwrap();
                if st.density() > 0.3 { alive += 1; }
            }
            println!("half {half}, density {density}: {alive}/5 alive at t=10");
        }
    }
}
