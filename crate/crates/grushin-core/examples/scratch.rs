// temporary oracle-value computation; not part of the deliverable
use grushin_core::*;

fn main() {
    let params = ModelParams::new(1, 1, 2.0, 2.0).unwrap();
    let base = Grid::default_desk();

    println!("--- smoothing slopes, narrower bump + later window ---");
    for &(sigma, ref ts) in &[
        (0.12_f64, vec![2.0, 2.83, 4.0, 5.66, 8.0]),
        (0.12, vec![1.5, 2.0, 3.0, 4.0, 6.0]),
        (0.10, vec![2.0, 2.83, 4.0, 5.66, 8.0]),
    ] {
        let phi = data::gaussian_bump(base, 1.0, sigma);
        let mut sups = Vec::new();
        let mut l2s = Vec::new();
        for &t in ts {
            let bank = build_propagator_bank(&base, t).unwrap();
            let out = apply_semigroup(&bank, &phi).unwrap();
            sups.push(lp_norm(&out, f64::INFINITY).unwrap());
            l2s.push(lp_norm(&out, 2.0).unwrap());
        }
        println!(
            "sigma={sigma} ts={ts:?}: inf slope={:.5} l2 slope={:.5}",
            numerics::fit_log_slope(ts, &sups),
            numerics::fit_log_slope(ts, &l2s)
        );
    }

    println!("--- blow-up t_max fit after widening ---");
    {
        let g = Grid::new(1, 1, 6.0, 384, 8.0, 64).unwrap();
        let u0 = data::smooth_plateau(g, 10.0, 3.5, 4.0, 0.6);
        for &dt in &[1e-3, 5e-4] {
            let cfg = SolverConfig::new(0.15, dt).unwrap();
            let (rep, _) = step_evolve(&params, &g, &cfg, &u0).unwrap();
            let verdict = detect_blowup(&rep).unwrap();
            println!(
                "dt={dt}: cross={:?} t_max={:?}",
                rep.blowup_time, verdict.estimated_t_max
            );
        }
        // restart just before blow-up keeps blowing up with a consistent pole
        let cfg_pre = SolverConfig::new(0.07, 1e-3).unwrap();
        let (_, state) = step_evolve(&params, &g, &cfg_pre, &u0).unwrap();
        let cfg_post = SolverConfig::new(0.08, 1e-3).unwrap();
        let (rep2, _) = step_evolve(&params, &g, &cfg_post, &state).unwrap();
        let verdict2 = detect_blowup(&rep2).unwrap();
        println!(
            "restart at 0.07: cross={:?} t_max(total)={:?}",
            rep2.blowup_time.map(|t| t + 0.07),
            verdict2.estimated_t_max.map(|t| t + 0.07)
        );
    }

    println!("--- apply vs direct kernel quadrature at 3 points ---");
    {
        let quad = KernelQuadrature::default();
        let phi = data::gaussian_bump(base, 1.0, 0.8);
        let bank = build_propagator_bank(&base, 1.0).unwrap();
        let out = apply_semigroup(&bank, &phi).unwrap();
        let yc = base.y_count();
        let vol = base.cell_volume();
        for &(ix, iy) in &[(64usize, 128usize), (70, 120), (58, 140)] {
            let x = base.x_axis_coord(ix);
            let y = base.y_axis_coord(iy);
            let mut acc = 0.0;
            let mut w = Vec::new();
            let mut z = Vec::new();
            for jf in 0..base.len() {
                base.x_point(jf / yc, &mut w);
                base.y_point(jf % yc, &mut z);
                acc += kernel_point(&params, &quad, &[x], &w, &[y - z[0]], 1.0).unwrap()
                    * phi.values()[jf];
            }
            acc *= vol;
            let got = out.values()[ix * yc + iy];
            println!(
                "({x:.3},{y:.3}): apply={got:.8e} direct={acc:.8e} rel={:.2e}",
                (got - acc).abs() / acc.abs()
            );
        }
    }
}
