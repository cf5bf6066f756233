use arclab_core::certifier::{
    c4_bound, certify, eta_bound, find_witness, kernel_c0_estimate, theta_exponent,
    AuxConstants, C0Source, CertifyError,
};
use arclab_core::model::{Grid, SensitivitySpec};
use clap::Args;
use serde_json::json;

use crate::{EXIT_INVALID, EXIT_NEGATIVE, EXIT_OK};

/// Grid used to estimate `c0` when `--c0` is not given.
const C0_GRID_CELLS: usize = 64;

#[derive(Args, Debug)]
pub struct CertifyArgs {
    /// Space dimension the theorem is applied in.
    #[arg(long)]
    n: u32,
    /// Attraction constant; defaults to the largest admissible for `--chi-*`.
    #[arg(long)]
    alpha: Option<f64>,
    /// Repulsion constant; defaults to the largest admissible for `--xi-*`.
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long, requires = "chi_k")]
    chi_chat: Option<f64>,
    #[arg(long, requires = "chi_chat")]
    chi_k: Option<f64>,
    #[arg(long, requires = "xi_k")]
    xi_chat: Option<f64>,
    #[arg(long, requires = "xi_chat")]
    xi_k: Option<f64>,
    /// Initial mass `int u0`.
    #[arg(long, default_value_t = 0.0)]
    m0: f64,
    /// `min v0`.
    #[arg(long, default_value_t = 0.0)]
    v0_min: f64,
    /// `min w0`.
    #[arg(long, default_value_t = 0.0)]
    w0_min: f64,
    /// Kernel lower bound; estimated on the unit square when omitted.
    #[arg(long)]
    c0: Option<f64>,
}

fn family(chat: Option<f64>, k: Option<f64>, floor: f64) -> Result<Option<SensitivitySpec>, String> {
    match (chat, k) {
        (Some(c), Some(k)) => {
            if !(k > 1.0) {
                return Err(format!("k = {k} <= 1 gives a divergent tail integral"));
            }
            SensitivitySpec::power(c, k)
                .and_then(|s| s.with_eta_floor(floor))
                .map(Some)
                .map_err(|e| e.to_string())
        }
        _ => Ok(None),
    }
}

fn invalid(msg: &str) -> u8 {
    println!("{}", json!({ "certified": false, "error": msg }));
    eprintln!("error: {msg}");
    EXIT_INVALID
}

pub fn run(args: &CertifyArgs) -> u8 {
    for (name, x) in [("m0", args.m0), ("v0-min", args.v0_min), ("w0-min", args.w0_min)] {
        if !(x.is_finite() && x >= 0.0) {
            return invalid(&format!("--{name} must be nonnegative"));
        }
    }
    let (c0, c0_source) = match args.c0 {
        Some(c) if c.is_finite() && c > 0.0 => (c, C0Source::Override),
        Some(c) => return invalid(&format!("--c0 must be positive, got {c}")),
        None => {
            let grid = Grid::new_2d([1.0, 1.0], [C0_GRID_CELLS, C0_GRID_CELLS]).expect("fixed grid");
            match kernel_c0_estimate(&grid, 1.0) {
                Ok(c) => (c, C0Source::Estimated),
                Err(e) => return invalid(&e.to_string()),
            }
        }
    };
    let eta1 = eta_bound(args.v0_min, args.m0, c0);
    let eta2 = eta_bound(args.w0_min, args.m0, c0);
    let chi = match family(args.chi_chat, args.chi_k, eta1) {
        Ok(f) => f,
        Err(e) => return invalid(&format!("chi: {e}")),
    };
    let xi = match family(args.xi_chat, args.xi_k, eta2) {
        Ok(f) => f,
        Err(e) => return invalid(&format!("xi: {e}")),
    };
    let resolve = |given: Option<f64>, spec: &Option<SensitivitySpec>, name: &str| match (given, spec) {
        (Some(x), _) => Ok(x),
        (None, Some(s)) => s.max_alpha().map_err(|e| e.to_string()),
        (None, None) => Err(format!("--{name} or its family parameters are required")),
    };
    let alpha = match resolve(args.alpha, &chi, "alpha") {
        Ok(a) => a,
        Err(e) => return invalid(&e),
    };
    let beta = match resolve(args.beta, &xi, "beta") {
        Ok(b) => b,
        Err(e) => return invalid(&e),
    };
    if !(alpha.is_finite() && alpha > 0.0 && beta.is_finite() && beta > 0.0) {
        return invalid("alpha and beta must be positive");
    }

    let hypotheses = json!({
        "chi": chi.as_ref().map(|s| s.validate_hypotheses(alpha)),
        "xi": xi.as_ref().map(|s| s.validate_hypotheses(beta)),
    });
    let certificate = match certify(args.n, alpha, beta) {
        Ok(c) => c,
        Err(CertifyError::InvalidInput(msg)) => return invalid(&msg),
        Err(e) => {
            let kind = reason_kind(&e);
            println!(
                "{}",
                serde_json::to_string_pretty(&json!({
                    "certified": false,
                    "reason": kind,
                    "message": e.to_string(),
                    "n": args.n, "alpha": alpha, "beta": beta,
                }))
                .unwrap()
            );
            return EXIT_NEGATIVE;
        }
    };
    let witness = if certificate.feasible {
        Some(find_witness(args.n, alpha, beta))
    } else {
        None
    };
    let (witness_json, witness_err, p, r, sigma) = match &witness {
        Some(Ok(w)) => (Some(w), None, Some(w.p), w.r, w.sigma),
        Some(Err(e)) => (None, Some(e), None, 0.0, 0.0),
        None => (None, None, None, 0.0, 0.0),
    };
    let c4 = match (&chi, &xi, p) {
        (Some(c), Some(x), Some(_)) => c4_bound(c, x, r, sigma).ok(),
        _ => None,
    };
    let aux = AuxConstants {
        eta1,
        eta2,
        c0,
        c0_source,
        c4,
        theta: p.map(|p| theta_exponent(p, args.n)).unwrap_or(f64::NAN),
    };
    let certified = certificate.feasible && witness_json.is_some();
    let reason = if !certificate.feasible {
        Some("Infeasible")
    } else {
        witness_err.map(reason_kind)
    };
    let report = json!({
        "certified": certified,
        "reason": reason,
        "message": witness_err.map(|e| e.to_string()),
        "certificate": certificate,
        "witness": witness_json,
        "aux": aux,
        "hypotheses": hypotheses,
    });
    println!("{}", serde_json::to_string_pretty(&report).unwrap());
    if certified {
        EXIT_OK
    } else {
        EXIT_NEGATIVE
    }
}

fn reason_kind(e: &CertifyError) -> &'static str {
    match e {
        CertifyError::BetaInfeasible { .. } => "BetaInfeasible",
        CertifyError::DenominatorNonpositive { .. } => "DenominatorNonpositive",
        CertifyError::NegativeDiscriminant { .. } => "NegativeDiscriminant",
        CertifyError::Infeasible { .. } => "Infeasible",
        CertifyError::NotFound { .. } => "NotFound",
        CertifyError::WitnessRejected(_) => "WitnessRejected",
        CertifyError::InvalidInput(_) => "InvalidInput",
    }
}
