use arclab_core::solver::convergence::{
    decay_study, DtPolicy, DEFAULT_CELLS, DEFAULT_T_END, DT_PER_H2, ORDER_BAND,
};
use clap::Args;

use crate::{EXIT_INVALID, EXIT_NEGATIVE, EXIT_OK};

#[derive(Args, Debug)]
pub struct ConvergenceArgs {
    /// Resolutions, coarse to fine.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_CELLS)]
    cells: Vec<usize>,
    /// Fixed time step; defaults to `0.25 h^2` per resolution.
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_T_END)]
    t_end: f64,
}

pub fn run(args: &ConvergenceArgs) -> u8 {
    if args.cells.len() < 2 {
        eprintln!("error: at least two resolutions are needed for an order");
        return EXIT_INVALID;
    }
    let policy = match args.dt {
        Some(dt) => DtPolicy::Fixed(dt),
        None => DtPolicy::ScaledH2(DT_PER_H2),
    };
    let table = match decay_study(&args.cells, policy, args.t_end) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INVALID;
        }
    };
    println!("decay test v = exp(-(1 + pi^2) t) cos(pi x), t_end = {}", table.t_end);
    println!("{:>8} {:>12} {:>12} {:>8} {:>14} {:>8}", "cells", "h", "dt", "steps", "linf_error", "order");
    for (k, row) in table.rows.iter().enumerate() {
        let order = if k == 0 {
            "-".to_string()
        } else {
            format!("{:.3}", table.orders[k - 1])
        };
        println!(
            "{:>8} {:>12.4e} {:>12.4e} {:>8} {:>14.6e} {:>8}",
            row.cells, row.h, row.dt, row.steps, row.linf_error, order
        );
    }
    let ok = table.orders_within(ORDER_BAND);
    println!(
        "orders {} [{}, {}]",
        if ok { "within" } else { "OUTSIDE" },
        ORDER_BAND.0,
        ORDER_BAND.1
    );
    if ok {
        EXIT_OK
    } else {
        EXIT_NEGATIVE
    }
}
