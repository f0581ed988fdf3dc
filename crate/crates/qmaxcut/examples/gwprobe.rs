use qmaxcut::graph::{brute_force_maxcut, sample_erdos_renyi};
use qmaxcut::gw::{default_rank, solve_relaxation, DEFAULT_MAX_ITERS, DEFAULT_TOL};

fn main() {
    for n in [6usize, 10, 12] {
        let mut iters = Vec::new();
        let mut conv = 0;
        let mut below_opt = 0;
        let start = std::time::Instant::now();
        for seed in 0..30u64 {
            let g = sample_erdos_renyi(n, 0.5, 9000 + seed).unwrap();
            let e = solve_relaxation(&g, default_rank(n), DEFAULT_MAX_ITERS, DEFAULT_TOL, seed).unwrap();
            let opt = brute_force_maxcut(&g).unwrap().value;
            iters.push(e.iterations);
            if e.converged { conv += 1; }
            if e.objective < opt - 1e-6 { below_opt += 1; }
        }
        iters.sort();
        println!("n={n}: converged {conv}/30, below-OPT {below_opt}/30, iters median {} max {}, elapsed {:?}",
                 iters[15], iters[29], start.elapsed());
    }
}
