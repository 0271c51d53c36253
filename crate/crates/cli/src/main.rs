//! Batch front-end: one subcommand per experiment, CSV/SVG emission,
//! reproducible seeding. Identical (subcommand, flags, seed) produce
//! byte-identical output bodies regardless of worker count.

use clap::{Parser, Subcommand};
use percolab::brochette;
use percolab::coupling;
use percolab::perc3d;
use percolab::report::{fmt_f64, write_atomic, CsvReport};
use percolab::rng::RngStream;
use percolab::site2d;
use percolab::spiral;
use percolab::svg;
use std::path::PathBuf;
use std::process::ExitCode;

const VERSION: &str = env!("CARGO_PKG_VERSION");

// Exit codes: 0 success, 2 usage (from clap), 3 precondition failure,
// 4 internal invariant violation.
const EXIT_PRECONDITION: u8 = 3;
const EXIT_INVARIANT: u8 = 4;

#[derive(Parser)]
#[command(name = "percolab", version, about = "Percolation experiments on a column-diluted cubic lattice")]
struct Cli {
    /// Base seed (falls back to PERCOLAB_SEED, then 0).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: machine parallelism).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the planar site threshold by intersecting square crossing
    /// curves of increasing size.
    EstimateRhoc {
        #[arg(long, value_delimiter = ',', default_value = "32,64,128")]
        sizes: Vec<u32>,
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Find the smallest base scale whose spiral rectangles meet the
    /// crossing schedule at the given density.
    CalibrateL {
        #[arg(long)]
        rho: f64,
        #[arg(long, default_value_t = 3)]
        imax: u32,
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
        #[arg(long, default_value_t = 128)]
        lmax: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render one realized spiral construction as a self-contained SVG.
    SpiralDemo {
        #[arg(long)]
        rho: f64,
        #[arg(long, default_value_t = 4)]
        l: u32,
        #[arg(long, default_value_t = 3)]
        k: u32,
        #[arg(long, default_value_t = 10_000)]
        max_tries: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo frequency of the simultaneous lowest-crossing event.
    DeltaProb {
        #[arg(long)]
        rho: f64,
        #[arg(long)]
        l: u32,
        #[arg(long, default_value_t = 3)]
        k: u32,
        #[arg(long, default_value_t = 1000)]
        samples: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Chi-square test that thread-site states are fresh Bernoulli draws,
    /// conditioned on the modal crossing sequence.
    FreshnessTest {
        #[arg(long)]
        rho: f64,
        #[arg(long, default_value_t = 1)]
        l: u32,
        #[arg(long, default_value_t = 2)]
        k: u32,
        #[arg(long, default_value_t = 4000)]
        samples: u64,
        #[arg(long, default_value_t = 50)]
        min_count: u64,
        /// Run the deliberate-bug harness that re-uses explored sites.
        #[arg(long)]
        stale: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Strip crossing frequency under randomly strengthened columns.
    BrochetteCross {
        #[arg(long)]
        u: f64,
        /// Forbidden column set: none, even, odd, or a comma list.
        #[arg(long, default_value = "none")]
        forbidden: String,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: f64,
        #[arg(long, value_delimiter = ',', default_value = "16,32,64")]
        n: Vec<u32>,
        #[arg(long, value_delimiter = ',', default_value = "128")]
        height: Vec<u32>,
        #[arg(long, default_value_t = 2000)]
        samples: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact enumeration of the strong-edge detour gadget against the
    /// closed-form boosted probability.
    CouplingGadget {
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.3,0.5,0.7,0.9")]
        p: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pathwise domination check over coupled samples: any strip crossing
    /// must lift to a connection over the decorated structure.
    CouplingVerify {
        #[arg(long)]
        rho: f64,
        #[arg(long, value_delimiter = ',', default_value = "0.3,0.5")]
        p: Vec<f64>,
        #[arg(long, default_value_t = 16)]
        l: u32,
        #[arg(long, default_value_t = 3)]
        k: u32,
        #[arg(long, default_value_t = 4)]
        height: u32,
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Two-sided comparison of the conditional connection probability over
    /// a decorated path against the derived strip crossing probability.
    ConditionalInequality {
        #[arg(long)]
        rho: f64,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 8)]
        l: u32,
        #[arg(long, default_value_t = 2)]
        k: u32,
        #[arg(long, value_delimiter = ',', default_value = "6,12")]
        height: Vec<u32>,
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Spanning-probability sweep over boxes and the finite-size estimate of
    /// the bond threshold at one or more column densities.
    PcSweep {
        #[arg(long, value_delimiter = ',', default_value = "0.65,0.8,1.0")]
        rho: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "16,24,32")]
        sizes: Vec<u32>,
        #[arg(long, default_value_t = 1.0)]
        aspect: f64,
        #[arg(long, default_value_t = 1500)]
        samples: u64,
        #[arg(long, default_value_t = 0.02)]
        grid_step: f64,
        /// Per-point sweep rows.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Curve summary rows.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Plot a threshold-curve summary CSV as a self-contained SVG.
    CurvePlot {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(workers) = cli.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .expect("worker pool set once at startup");
    }
    let seed = cli.seed.unwrap_or_else(|| {
        std::env::var("PERCOLAB_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(0)
    });
    match run(cli.command, seed) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}

fn emit(report: &CsvReport, out: Option<&PathBuf>) -> std::io::Result<()> {
    match out {
        Some(path) => report.write_atomic(path),
        None => {
            print!("{}", report.render());
            Ok(())
        }
    }
}

fn emit_text(text: &str, out: Option<&PathBuf>) -> std::io::Result<()> {
    match out {
        Some(path) => write_atomic(path, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_forbidden(spec: &str, n: u32) -> Result<Vec<u32>, String> {
    let set: Vec<u32> = match spec {
        "none" => Vec::new(),
        "even" => (0..=n).step_by(2).collect(),
        "odd" => (1..=n).step_by(2).collect(),
        list => list
            .split(',')
            .map(|s| s.trim().parse::<u32>().map_err(|e| format!("bad forbidden index {s}: {e}")))
            .collect::<Result<_, _>>()?,
    };
    if !brochette::is_two_spaced(&set, n) {
        return Err(format!("forbidden set {spec:?} is not 2-spaced within 0..={n}"));
    }
    Ok(set)
}

fn run(command: Command, seed: u64) -> std::io::Result<ExitCode> {
    match command {
        Command::EstimateRhoc { sizes, samples, out } => {
            let stream = RngStream::new(seed, 0x2d);
            let est = site2d::estimate_rho_c(&sizes, samples, &stream);
            let mut r = CsvReport::new(
                "site threshold of the planar column environment, by intersection of square hard-crossing curves",
            );
            r.push_meta("version", VERSION);
            r.push_meta("seed", seed);
            r.push_meta("sizes", sizes.iter().map(u32::to_string).collect::<Vec<_>>().join(" "));
            r.push_meta("n_samples", samples);
            r.push_meta("estimate", fmt_f64(est.estimate));
            r.push_meta("ci_half_width", fmt_f64(est.half_width));
            r.set_columns(&["small_size", "large_size", "intersection"]);
            for (w, v) in sizes.windows(2).zip(&est.pair_estimates) {
                r.push_row(vec![w[0].to_string(), w[1].to_string(), fmt_f64(*v)]);
            }
            emit(&r, out.as_ref())?;
            eprintln!("threshold estimate {:.5} +/- {:.5}", est.estimate, est.half_width);
            Ok(ExitCode::SUCCESS)
        }
        Command::CalibrateL { rho, imax, samples, lmax, out } => {
            let stream = RngStream::new(seed, 0xca);
            match site2d::calibrate_l(rho, imax, samples, lmax, &stream, site2d::default_target) {
                Err(err) => {
                    eprintln!("calibration failed: {err}");
                    Ok(ExitCode::from(EXIT_PRECONDITION))
                }
                Ok(cal) => {
                    let mut r = CsvReport::new(
                        "hard-crossing probabilities of the spiral rectangles during base-scale calibration",
                    );
                    r.push_meta("version", VERSION);
                    r.push_meta("seed", seed);
                    r.push_meta("rho", fmt_f64(rho));
                    r.push_meta("i_max", imax);
                    r.push_meta("n_samples", samples);
                    r.push_meta("chosen_l", cal.l);
                    r.set_columns(&[
                        "l", "stage", "long", "short", "estimate", "ci", "lower_bound", "target",
                        "pass",
                    ]);
                    for e in &cal.evidence {
                        r.push_row(vec![
                            e.l.to_string(),
                            e.stage.to_string(),
                            e.long.to_string(),
                            e.short.to_string(),
                            fmt_f64(e.estimate.mean),
                            fmt_f64(e.estimate.half_width),
                            fmt_f64(e.lower_bound),
                            fmt_f64(e.target),
                            e.pass.to_string(),
                        ]);
                    }
                    emit(&r, out.as_ref())?;
                    eprintln!("calibrated scale L = {} at rho = {rho}", cal.l);
                    Ok(ExitCode::SUCCESS)
                }
            }
        }
        Command::SpiralDemo { rho, l, k, max_tries, out } => {
            let plan = spiral::SpiralPlan::new(l, k);
            let stream = RngStream::new(seed, 0x5d);
            match spiral::sample_decorated(rho, &plan, k, max_tries, &stream) {
                None => {
                    eprintln!("no environment realized the event in {max_tries} tries");
                    Ok(ExitCode::from(EXIT_PRECONDITION))
                }
                Some((decorated, tries)) => {
                    let svg_text = svg::render_spiral(&plan, Some(&decorated));
                    emit_text(&svg_text, out.as_ref())?;
                    eprintln!(
                        "realized at replica {tries}: path length {}, gaps {}, threads {}, threads outside rectangles {}",
                        decorated.path.len(),
                        decorated.gaps.len(),
                        decorated.thread_sites().len(),
                        decorated.threads_outside_rects(&plan),
                    );
                    Ok(ExitCode::SUCCESS)
                }
            }
        }
        Command::DeltaProb { rho, l, k, samples, out } => {
            let stream = RngStream::new(seed, 0xde);
            let est = spiral::estimate_delta_prob(rho, l, k, samples, &stream);
            let mut r = CsvReport::new(
                "frequency of the simultaneous lowest-crossing event over the first k spiral rectangles",
            );
            r.push_meta("version", VERSION);
            r.push_meta("seed", seed);
            r.set_columns(&["rho", "l", "k", "estimate", "ci", "n_samples"]);
            r.push_row(vec![
                fmt_f64(rho),
                l.to_string(),
                k.to_string(),
                fmt_f64(est.mean),
                fmt_f64(est.half_width),
                samples.to_string(),
            ]);
            emit(&r, out.as_ref())?;
            eprintln!(
                "event frequency {:.4} +/- {:.4} (lower bound {:.4})",
                est.mean,
                est.half_width,
                est.lower()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::FreshnessTest { rho, l, k, samples, min_count, stale, out } => {
            let rule = if stale { spiral::ThreadRule::Stale } else { spiral::ThreadRule::Fresh };
            let stream = RngStream::new(seed, 0xf7);
            match spiral::freshness_test(rho, l, k, samples, min_count, rule, &stream) {
                Err(err) => {
                    eprintln!("freshness test unavailable: {err}");
                    Ok(ExitCode::from(EXIT_PRECONDITION))
                }
                Ok(rep) => {
                    let mut r = CsvReport::new(
                        "chi-square test of thread-site freshness, conditioned on the modal crossing sequence",
                    );
                    r.push_meta("version", VERSION);
                    r.push_meta("seed", seed);
                    r.push_meta("thread_rule", if stale { "stale" } else { "fresh" });
                    r.set_columns(&[
                        "rho",
                        "l",
                        "k",
                        "n_samples",
                        "n_conditioned",
                        "modal_count",
                        "thread_sites",
                        "statistic",
                        "p_value",
                        "skipped",
                    ]);
                    r.push_row(vec![
                        fmt_f64(rep.rho),
                        rep.l.to_string(),
                        rep.k.to_string(),
                        rep.n_samples.to_string(),
                        rep.n_conditioned.to_string(),
                        rep.modal_count.to_string(),
                        rep.thread_site_count.to_string(),
                        fmt_f64(rep.statistic),
                        fmt_f64(rep.p_value),
                        rep.skipped.to_string(),
                    ]);
                    emit(&r, out.as_ref())?;
                    eprintln!("p-value {:.6} on {} thread sites", rep.p_value, rep.thread_site_count);
                    Ok(ExitCode::SUCCESS)
                }
            }
        }
        Command::BrochetteCross { u, forbidden, p, q, n, height, samples, out } => {
            let stream = RngStream::new(seed, 0xbc);
            let mut r =
                CsvReport::new("origin-to-far-column crossing frequency of the strengthened strip");
            r.push_meta("version", VERSION);
            r.push_meta("seed", seed);
            r.set_columns(&[
                "u", "forbidden", "p", "q", "n", "height", "estimate", "ci", "n_samples", "seed",
            ]);
            for (idx, (nn, hh)) in n
                .iter()
                .flat_map(|&nn| height.iter().map(move |&hh| (nn, hh)))
                .enumerate()
            {
                let set = match parse_forbidden(&forbidden, nn) {
                    Ok(s) => s,
                    Err(msg) => {
                        eprintln!("{msg}");
                        return Ok(ExitCode::from(EXIT_PRECONDITION));
                    }
                };
                let est = match brochette::estimate_strip_crossing(
                    u,
                    &set,
                    p,
                    q,
                    nn,
                    hh,
                    samples,
                    &stream.substream(idx as u64),
                ) {
                    Ok(e) => e,
                    Err(err) => {
                        eprintln!("{err}");
                        return Ok(ExitCode::from(EXIT_PRECONDITION));
                    }
                };
                r.push_row(vec![
                    fmt_f64(u),
                    forbidden.clone(),
                    fmt_f64(p),
                    fmt_f64(q),
                    nn.to_string(),
                    hh.to_string(),
                    fmt_f64(est.mean),
                    fmt_f64(est.half_width),
                    samples.to_string(),
                    seed.to_string(),
                ]);
                eprintln!("n={nn} H={hh}: crossing {:.4} +/- {:.4}", est.mean, est.half_width);
            }
            emit(&r, out.as_ref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::CouplingGadget { p, out } => {
            let eps = coupling::epsilon();
            let dprime = coupling::solve_delta_prime();
            let mut r = CsvReport::new(
                "exact detour-gadget enumeration against the closed-form boosted edge probability",
            );
            r.push_meta("version", VERSION);
            r.push_meta("seed", seed);
            r.push_meta("epsilon", fmt_f64(eps));
            r.push_meta("delta_prime", fmt_f64(dprime));
            r.set_columns(&["p", "enumerated", "closed_form", "abs_diff"]);
            let mut worst: f64 = 0.0;
            for &pp in &p {
                let exact = coupling::gadget_exact(pp);
                let closed = coupling::params(0.0, pp).q;
                let diff = (exact - closed).abs();
                worst = worst.max(diff);
                r.push_row(vec![fmt_f64(pp), fmt_f64(exact), fmt_f64(closed), fmt_f64(diff)]);
                println!("p={pp}: enumerated {exact:.12}, closed form {closed:.12}, diff {diff:.3e}");
            }
            println!("epsilon = {eps:.10}, delta' = {dprime:.10}");
            emit(&r, out.as_ref())?;
            if worst > 1e-12 {
                eprintln!("gadget mismatch above tolerance: {worst:.3e}");
                return Ok(ExitCode::from(EXIT_INVARIANT));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::CouplingVerify { rho, p, l, k, height, samples, out } => {
            let plan = spiral::SpiralPlan::new(l, k);
            let stream = RngStream::new(seed, 0xc0);
            let Some((decorated, _)) = spiral::sample_decorated(rho, &plan, k, 10_000, &stream)
            else {
                eprintln!("no decorated path realized");
                return Ok(ExitCode::from(EXIT_PRECONDITION));
            };
            let topo = match coupling::CouplingTopology::new(&decorated) {
                Ok(t) => t,
                Err(err) => {
                    eprintln!("{err}");
                    return Ok(ExitCode::from(EXIT_INVARIANT));
                }
            };
            let mut r = CsvReport::new(
                "pathwise domination audit: strip crossings must lift to connections over the decorated structure",
            );
            r.push_meta("version", VERSION);
            r.push_meta("seed", seed);
            r.push_meta("l", l);
            r.push_meta("k", k);
            r.push_meta("path_len", topo.path_len());
            r.push_meta("gamma_hash", format!("{:016x}", spiral::path_hash(&decorated.path)));
            r.set_columns(&[
                "rho",
                "p",
                "height",
                "n_samples",
                "violations",
                "edge_violations",
                "strip_crossing_freq",
                "structure_crossing_freq",
            ]);
            let mut any_violation = false;
            for (pi, &pp) in p.iter().enumerate() {
                let sub = stream.substream(1000 + pi as u64);
                use rayon::prelude::*;
                let tallies: Vec<(u64, u64, u64, u64)> = (0..samples)
                    .into_par_iter()
                    .map(|rep| {
                        let mut rng = sub.substream(rep);
                        let sample = coupling::sample_coupled(&topo, rho, pp, height, &mut rng);
                        let strip = brochette::strip_crossing(&sample.strip);
                        let structure = sample.three_d.spans();
                        (
                            (strip && !structure) as u64,
                            coupling::edge_lift_violations(&topo, &sample) as u64,
                            strip as u64,
                            structure as u64,
                        )
                    })
                    .collect();
                let mut violations = 0u64;
                let mut edge_violations = 0u64;
                let mut strip_hits = 0u64;
                let mut structure_hits = 0u64;
                for (v, e, s, t) in tallies {
                    violations += v;
                    edge_violations += e;
                    strip_hits += s;
                    structure_hits += t;
                }
                any_violation |= violations > 0 || edge_violations > 0;
                r.push_row(vec![
                    fmt_f64(rho),
                    fmt_f64(pp),
                    height.to_string(),
                    samples.to_string(),
                    violations.to_string(),
                    edge_violations.to_string(),
                    fmt_f64(strip_hits as f64 / samples as f64),
                    fmt_f64(structure_hits as f64 / samples as f64),
                ]);
                eprintln!(
                    "p={pp}: {violations} event violations, {edge_violations} edge violations over {samples} samples"
                );
            }
            emit(&r, out.as_ref())?;
            if any_violation {
                eprintln!("domination violated; the coupling construction is broken");
                return Ok(ExitCode::from(EXIT_INVARIANT));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::ConditionalInequality { rho, p, l, k, height, samples, out } => {
            let plan = spiral::SpiralPlan::new(l, k);
            let stream = RngStream::new(seed, 0xc1);
            let Some((decorated, _)) = spiral::sample_decorated(rho, &plan, k, 10_000, &stream)
            else {
                eprintln!("no decorated path realized");
                return Ok(ExitCode::from(EXIT_PRECONDITION));
            };
            println!("epsilon = {:.10}", coupling::epsilon());
            let mut r = CsvReport::new(
                "conditional connection probability over the decorated structure against the strip bound",
            );
            r.push_meta("version", VERSION);
            r.push_meta("seed", seed);
            r.push_meta("epsilon", fmt_f64(coupling::epsilon()));
            r.set_columns(&[
                "rho", "p", "l", "k", "height", "gamma_hash", "lhs", "lhs_ci", "rhs", "rhs_ci",
                "n_samples", "seed",
            ]);
            let gamma_hash = format!("{:016x}", spiral::path_hash(&decorated.path));
            let mut reversed = false;
            for (hi, &hh) in height.iter().enumerate() {
                let rep = coupling::conditional_inequality_estimate(
                    &decorated,
                    rho,
                    p,
                    hh,
                    samples,
                    &stream.substream(2000 + hi as u64),
                )
                .expect("decorated path is a valid coupling substrate");
                reversed |= rep.reversal;
                r.push_row(vec![
                    fmt_f64(rho),
                    fmt_f64(p),
                    l.to_string(),
                    k.to_string(),
                    hh.to_string(),
                    gamma_hash.clone(),
                    fmt_f64(rep.lhs.mean),
                    fmt_f64(rep.lhs.half_width),
                    fmt_f64(rep.rhs.mean),
                    fmt_f64(rep.rhs.half_width),
                    samples.to_string(),
                    seed.to_string(),
                ]);
                eprintln!(
                    "H={hh}: structure {:.4} +/- {:.4} vs strip {:.4} +/- {:.4}",
                    rep.lhs.mean, rep.lhs.half_width, rep.rhs.mean, rep.rhs.half_width
                );
            }
            emit(&r, out.as_ref())?;
            if reversed {
                eprintln!("statistically significant reversal of the domination inequality");
                return Ok(ExitCode::from(EXIT_INVARIANT));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::PcSweep { rho, sizes, aspect, samples, grid_step, out, summary } => {
            let stream = RngStream::new(seed, 0x3d);
            let mut rows = CsvReport::new(
                "box spanning probability of the diluted lattice as a function of the bond parameter",
            );
            rows.push_meta("version", VERSION);
            rows.push_meta("seed", seed);
            rows.push_meta("aspect", fmt_f64(aspect));
            rows.set_columns(&[
                "rho", "p", "n", "height", "spanning_freq", "ci", "n_samples", "seed",
            ]);
            let mut sum = CsvReport::new("finite-size intersection estimate of the bond threshold");
            sum.push_meta("version", VERSION);
            sum.push_meta("seed", seed);
            sum.set_columns(&["rho", "pc_hat", "ci", "method"]);
            for (ri, &rr) in rho.iter().enumerate() {
                let est = match perc3d::estimate_pc(
                    rr,
                    &sizes,
                    aspect,
                    samples,
                    &stream.substream(ri as u64),
                ) {
                    Ok(e) => e,
                    Err(err) => {
                        eprintln!("rho={rr}: {err}");
                        return Ok(ExitCode::from(EXIT_PRECONDITION));
                    }
                };
                for curve in &est.curves {
                    let height = ((curve.size as f64 * aspect).round() as u32).max(1);
                    let mut pgrid = 0.0;
                    while pgrid <= 1.0 + grid_step / 2.0 {
                        let freq = curve.value_at(pgrid);
                        let ci =
                            percolab::stats::Z95 * (freq * (1.0 - freq) / samples as f64).sqrt();
                        rows.push_row(vec![
                            fmt_f64(rr),
                            fmt_f64(pgrid),
                            curve.size.to_string(),
                            height.to_string(),
                            fmt_f64(freq),
                            fmt_f64(ci),
                            samples.to_string(),
                            seed.to_string(),
                        ]);
                        pgrid += grid_step;
                    }
                }
                let method = if est.subcritical { "no-spanning" } else { "intersection" };
                sum.push_row(vec![
                    fmt_f64(rr),
                    fmt_f64(est.estimate),
                    fmt_f64(est.half_width),
                    method.to_string(),
                ]);
                eprintln!(
                    "rho={rr}: threshold {:.4} +/- {:.4} ({method})",
                    est.estimate, est.half_width
                );
            }
            emit(&rows, out.as_ref())?;
            if let Some(path) = summary.as_ref() {
                sum.write_atomic(path)?;
            } else {
                print!("{}", sum.render());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::CurvePlot { input, out } => {
            let text = std::fs::read_to_string(&input)?;
            let mut lines = text.lines().filter(|l| !l.starts_with('#'));
            let header: Vec<&str> = lines.next().unwrap_or("").split(',').collect();
            let col = |name: &str| header.iter().position(|&h| h == name);
            let (Some(ci_rho), Some(ci_pc), Some(ci_ci)) = (col("rho"), col("pc_hat"), col("ci"))
            else {
                eprintln!("input is not a threshold summary (need rho, pc_hat, ci columns)");
                return Ok(ExitCode::from(EXIT_PRECONDITION));
            };
            let mut points = Vec::new();
            for line in lines {
                let f: Vec<&str> = line.split(',').collect();
                if f.len() < header.len() {
                    continue;
                }
                let parse = |s: &str| s.parse::<f64>().ok();
                if let (Some(x), Some(y), Some(ci)) =
                    (parse(f[ci_rho]), parse(f[ci_pc]), parse(f[ci_ci]))
                {
                    points.push((x, y, ci));
                }
            }
            points.sort_by(|a, b| a.0.total_cmp(&b.0));
            let series = svg::Series { label: "threshold".to_string(), points };
            let svg_text =
                svg::render_curves("column density", "bond threshold", &[series], Some(0.5));
            emit_text(&svg_text, out.as_ref())?;
            Ok(ExitCode::SUCCESS)
        }
    }
}
