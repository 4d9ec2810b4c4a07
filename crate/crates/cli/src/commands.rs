//! Subcommand bodies: wiring the library into files and exit codes.

use std::fs;
use std::path::Path;

use homoflow_core::analytic::{err_rec_continuous, limit_mu_tilde, paradox_bound};
use homoflow_core::bench::{
    loglog_slope, noise_benchmark, timing_sweep, Method, NoiseBenchConfig, TimingConfig,
};
use homoflow_core::dmd::{build_pair, continuous_eigs, dmd, err_dmd};
use homoflow_core::flow::{
    evolve_adaptive, evolve_fixed, extinction_time, synth_eigenflow, FlowParams, Sampling,
    SnapshotSequence,
};
use homoflow_core::operators::{OperatorConfig, PLaplacian};
use homoflow_core::orthons::{orthons, orthons_posterior};
use homoflow_core::{GridDim, GridSignal, RankPolicy};

use crate::io;
use crate::CliError;

fn snapshot_name(k: usize) -> String {
    format!("snap_{k:06}.csv")
}

pub fn flow(
    input: &Path,
    p: f64,
    eps: f64,
    delta: Option<f64>,
    dt: Option<f64>,
    steps: usize,
    out: &Path,
) -> Result<(), CliError> {
    let f = io::read_signal(input)?;
    let cfg = OperatorConfig::new(p, eps).map_err(|e| CliError::Usage(e.to_string()))?;
    let op = PLaplacian::new(cfg);
    let seq = match (delta, dt) {
        (Some(d), None) => evolve_adaptive(&f, &op, d, steps)?,
        (None, Some(dt)) => evolve_fixed(&f, &op, dt, steps)?,
        _ => {
            return Err(CliError::Usage(
                "exactly one of --delta and --dt must be given".into(),
            ))
        }
    };
    if seq.early_extinction {
        eprintln!(
            "warning: flow reached steady state after {} snapshots",
            seq.len()
        );
    } else if seq.len() >= 2 && seq.snapshots()[0] == seq.snapshots()[1] {
        eprintln!("warning: input is steady; snapshots are identical");
    }

    fs::create_dir_all(out)
        .map_err(|e| CliError::Other(format!("cannot create {}: {e}", out.display())))?;
    for (k, snap) in seq.snapshots().iter().enumerate() {
        io::write_csv_signal(&out.join(snapshot_name(k)), snap)?;
    }
    io::write_times_csv(&out.join("times.csv"), &seq.times())?;
    println!("wrote {} snapshots to {}", seq.len(), out.display());
    Ok(())
}

fn read_snapshot_dir(dir: &Path) -> Result<SnapshotSequence, CliError> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", dir.display())))?
        .filter_map(|entry| entry.ok())
        .map(|entry| entry.file_name().to_string_lossy().into_owned())
        .filter(|name| name.starts_with("snap_") && name.ends_with(".csv"))
        .collect();
    names.sort();
    if names.len() < 2 {
        return Err(CliError::Usage(format!(
            "{}: need at least two snap_*.csv files",
            dir.display()
        )));
    }
    let snaps = names
        .iter()
        .map(|name| io::read_csv_signal(&dir.join(name)))
        .collect::<Result<Vec<GridSignal>, CliError>>()?;
    let times = io::read_times_csv(&dir.join("times.csv"))?;
    if times.len() != snaps.len() {
        return Err(CliError::Usage(format!(
            "{}: times.csv has {} entries for {} snapshots",
            dir.display(),
            times.len(),
            snaps.len()
        )));
    }
    let dts: Vec<f64> = times.windows(2).map(|w| w[1] - w[0]).collect();
    SnapshotSequence::with_dts(snaps, dts).map_err(|e| CliError::Usage(e.to_string()))
}

#[allow(clippy::too_many_arguments)]
pub fn decompose(
    input: Option<&Path>,
    snapshots: Option<&Path>,
    p: f64,
    eps: f64,
    mode: &str,
    policy: RankPolicy,
    delta: f64,
    steps: usize,
    out: &Path,
) -> Result<(), CliError> {
    let dec = match mode {
        "prior" => {
            let input = input.ok_or(CliError::Usage("prior mode needs --input".into()))?;
            let f = io::read_signal(input)?;
            let cfg =
                OperatorConfig::new(p, eps).map_err(|e| CliError::Usage(e.to_string()))?;
            let op = PLaplacian::new(cfg);
            orthons(&f, &op, delta, steps, policy)?
        }
        "posterior" => {
            let dir = snapshots
                .ok_or(CliError::Usage("posterior mode needs --snapshots".into()))?;
            let seq = read_snapshot_dir(dir)?;
            let cfg =
                OperatorConfig::new(p, eps).map_err(|e| CliError::Usage(e.to_string()))?;
            let op = PLaplacian::new(cfg);
            orthons_posterior(&seq, p, Some(&op), policy)?
        }
        "blind" => {
            let dir =
                snapshots.ok_or(CliError::Usage("blind mode needs --snapshots".into()))?;
            let seq = read_snapshot_dir(dir)?;
            orthons_posterior(&seq, p, None, policy)?
        }
        other => return Err(CliError::Usage(format!("unknown mode {other}"))),
    };
    io::write_decomposition(out, &dec)?;
    println!("wrote {}-mode decomposition to {}", dec.rank(), out.display());
    Ok(())
}

fn parse_band(spec: &str) -> Result<(f64, f64), CliError> {
    let parse_bound = |tok: &str| -> Result<f64, CliError> {
        match tok.trim() {
            "inf" | "Inf" | "INF" => Ok(f64::INFINITY),
            t => t
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("bad band bound: {t}"))),
        }
    };
    let (lo, hi) = spec
        .split_once(':')
        .ok_or(CliError::Usage(format!("band must be MIN:MAX, got {spec}")))?;
    Ok((parse_bound(lo)?, parse_bound(hi)?))
}

pub fn filter(
    dec_path: &Path,
    keep_t: Option<&str>,
    h_path: Option<&Path>,
    out: &Path,
) -> Result<(), CliError> {
    let dec = io::read_decomposition(dec_path)?;
    println!(
        "filtering rank-{} decomposition (p={}, delta={:.4}, lambda range {:.3e}..{:.3e})",
        dec.rank(),
        dec.p,
        dec.delta,
        dec.lambdas.iter().cloned().fold(f64::INFINITY, f64::min),
        dec.lambdas.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    );
    let h: Vec<f64> = match (keep_t, h_path) {
        (Some(band), None) => {
            let (lo, hi) = parse_band(band)?;
            dec.ext_times
                .iter()
                .map(|&t| if t >= lo && t <= hi { 1.0 } else { 0.0 })
                .collect()
        }
        (None, Some(path)) => {
            let h_sig = io::read_csv_signal(path)?;
            h_sig.flat().to_vec()
        }
        _ => {
            return Err(CliError::Usage(
                "exactly one of --keep-T and --h must be given".into(),
            ))
        }
    };
    if h.iter().all(|&x| x == 0.0) {
        eprintln!("warning: empty band, output is zero");
    }
    let result = dec.filter(&h)?;
    match result.dim() {
        GridDim::One => io::write_csv_signal(out, &result)?,
        GridDim::Two => io::write_pgm16_with_scale(out, &result)?,
    }
    println!("wrote filtered signal to {}", out.display());
    Ok(())
}

pub fn paradox(p: f64, lambda: f64, levels: usize, out: &Path) -> Result<(), CliError> {
    if lambda >= 0.0 {
        return Err(CliError::Usage(format!("lambda must be negative, got {lambda}")));
    }
    let params =
        FlowParams::new(lambda, p, 1.0).map_err(|e| CliError::Usage(e.to_string()))?;
    let t_ext = extinction_time(&params);
    let bound = paradox_bound(1.0, lambda, p).map_err(|e| CliError::Usage(e.to_string()))?;
    let f = GridSignal::one_d(&[1.0], 1.0).map_err(|e| CliError::Other(e.to_string()))?;

    let mut csv = String::from("dt,err_dmd,err_rec_c,bound,mu_tilde\n");
    for level in 0..levels {
        let n = 50usize << level;
        let dt = t_ext / n as f64;
        let seq = synth_eigenflow(&f, &params, Sampling::Uniform { dt, snapshots: n + 1 })?;
        let result = dmd(&seq, RankPolicy::Fixed(1))?;
        let pair = build_pair(&seq)?;
        let fit_err = err_dmd(&result, &pair);
        let mu_tilde = continuous_eigs(&result)?[0].re;
        let rec_err = err_rec_continuous(&params, mu_tilde, 100_000)?;
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            io::fmt_float(dt),
            io::fmt_float(fit_err),
            io::fmt_float(rec_err),
            io::fmt_float(bound),
            io::fmt_float(mu_tilde),
        ));
    }
    fs::write(out, csv)
        .map_err(|e| CliError::Other(format!("cannot write {}: {e}", out.display())))?;
    println!(
        "wrote {levels} levels to {} (limit mu_tilde = {})",
        out.display(),
        limit_mu_tilde(lambda, p)
    );
    Ok(())
}

fn parse_f64_list(spec: &str) -> Result<Vec<f64>, CliError> {
    spec.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("bad number in list: {tok}")))
        })
        .collect()
}

pub fn bench_noise(
    trials: usize,
    snapshots: usize,
    snr: &str,
    seed: u64,
    out: &Path,
) -> Result<(), CliError> {
    let cfg = NoiseBenchConfig {
        trials,
        snapshots,
        snr_db_range: parse_f64_list(snr)?,
        rng_seed: seed,
        ..Default::default()
    };
    let stats = noise_benchmark(&cfg, &[Method::Dmd, Method::Sdmd])?;
    let mut csv = String::from(
        "method,snr_db,root,mean_re,mean_im,cov_xx,cov_xy,cov_yy,ellipse_a,ellipse_b,ellipse_theta\n",
    );
    for s in &stats {
        let root = if s.root.im == 0.0 {
            io::fmt_float(s.root.re)
        } else {
            format!("{}{:+}i", io::fmt_float(s.root.re), s.root.im)
        };
        csv.push_str(&format!(
            "{},{},{root},{},{},{},{},{},{},{},{}\n",
            s.method.name(),
            io::fmt_float(s.snr_db),
            io::fmt_float(s.mean.re),
            io::fmt_float(s.mean.im),
            io::fmt_float(s.cov[0]),
            io::fmt_float(s.cov[1]),
            io::fmt_float(s.cov[2]),
            io::fmt_float(s.ellipse.a),
            io::fmt_float(s.ellipse.b),
            io::fmt_float(s.ellipse.theta),
        ));
    }
    fs::write(out, csv)
        .map_err(|e| CliError::Other(format!("cannot write {}: {e}", out.display())))?;
    println!("wrote {} rows to {}", stats.len(), out.display());
    Ok(())
}

pub fn bench_time(sizes: &str, steps: usize, out: &Path) -> Result<(), CliError> {
    let sizes: Vec<usize> = sizes
        .split(',')
        .map(|tok| {
            tok.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Usage(format!("bad size: {tok}")))
        })
        .collect::<Result<Vec<usize>, CliError>>()?;
    let cfg = TimingConfig { steps, ..Default::default() };
    let samples = timing_sweep(&sizes, &cfg)?;
    let mut csv = String::from("size,seconds\n");
    for s in &samples {
        csv.push_str(&format!("{},{}\n", s.size, io::fmt_float(s.seconds)));
    }
    fs::write(out, csv)
        .map_err(|e| CliError::Other(format!("cannot write {}: {e}", out.display())))?;
    match loglog_slope(&samples) {
        Some(slope) => println!(
            "wrote {} sizes to {} (log-log slope {slope:.2})",
            samples.len(),
            out.display()
        ),
        None => println!("wrote {} sizes to {}", samples.len(), out.display()),
    }
    Ok(())
}
