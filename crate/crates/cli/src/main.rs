use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use divisor_span::counts::{IntervalCounter, WindowSpec};
use divisor_span::geometry::DivisorGeometry;
use divisor_span::harness::{self, emit_plot_data, PlotAxis, PlotData, RatioTable};
use divisor_span::mc::{exact_small_k, mc_estimate, RegionKind, RegionSpec};
use divisor_span::order_stats::{qk_exact, BoundarySpec};
use divisor_span::{apps, blocks, identities, shape, Error, Rational};

/// Divisors in intervals: exact counts, order predictions and numerical checks.
#[derive(Debug, Parser)]
#[command(name = "divisor-span", version)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Result store for `run` (overrides `output` in the config).
    #[arg(long, global = true)]
    store: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Count n <= x with a divisor in (y, z].
    Count {
        #[arg(long)]
        x: u64,
        #[arg(long)]
        y: f64,
        #[arg(long)]
        z: f64,
        /// Exactly r divisors in the window.
        #[arg(long)]
        r: Option<u32>,
        /// Only n in (x - delta, x].
        #[arg(long)]
        delta: Option<u64>,
        #[arg(long)]
        squarefree: bool,
        /// Only n with n - shift prime.
        #[arg(long, allow_hyphen_values = true)]
        shift: Option<i64>,
    },
    /// Order-of-magnitude prediction and shape parameters.
    Predict {
        #[arg(long)]
        x: f64,
        #[arg(long)]
        y: f64,
        #[arg(long)]
        z: f64,
        /// Predict H_r/H instead of H/x.
        #[arg(long)]
        r: Option<u32>,
    },
    /// Log-scale divisor geometry of n.
    Geometry {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        sigma: f64,
        #[arg(long, default_value_t = 1)]
        r: usize,
    },
    /// Boundary-crossing probability of uniform order statistics.
    Orderstat {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        u: f64,
        #[arg(long)]
        v: f64,
        /// Also estimate by Monte Carlo with this many samples.
        #[arg(long)]
        mc: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Monte Carlo estimate of k! times a region volume.
    Volume {
        #[arg(long)]
        kind: RegionKind,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        v: f64,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        s: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        gamma: Option<f64>,
        #[arg(long)]
        u: Option<f64>,
        #[arg(long = "M")]
        m: Option<usize>,
        #[arg(long, default_value_t = 100_000)]
        n: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also print the quadrature value (k <= 6).
        #[arg(long)]
        exact: bool,
    },
    /// Greedy prime blocks with reciprocal sums at most log 2.
    Blocks {
        #[arg(long, default_value_t = blocks::DEFAULT_PRIME_LIMIT)]
        prime_limit: u64,
        /// Check convergence of mu_j - j; exit 2 on failure.
        #[arg(long)]
        check: bool,
    },
    /// Exact combinatorial identities and bounds.
    Identity {
        #[arg(long)]
        which: IdentityKind,
        #[arg(long)]
        t: Option<u32>,
        /// Rational `p/q`.
        #[arg(long, allow_hyphen_values = true)]
        a: Option<Rational>,
        #[arg(long, allow_hyphen_values = true)]
        b: Option<Rational>,
        #[arg(long)]
        eps: Option<Rational>,
        #[arg(long)]
        x: Option<f64>,
        #[arg(long)]
        h: Option<u64>,
        #[arg(long)]
        m: Option<u64>,
        #[arg(long)]
        k: Option<u64>,
    },
    /// Multiplication table, Farey gaps and divisor-function sums.
    Apps {
        #[arg(long)]
        which: AppKind,
        #[arg(long)]
        x: Option<u64>,
        #[arg(long)]
        q: Option<u64>,
    },
    /// Run every experiment in a config file; rows go to stdout as CSV.
    Run {
        config: PathBuf,
        /// Write `<section>.svg` and `<section>.csv` ratio plots here.
        #[arg(long)]
        plot_dir: Option<PathBuf>,
        #[arg(long, default_value = "y")]
        plot_axis: String,
        /// Exit 2 if any section's max/min ratio exceeds this.
        #[arg(long)]
        max_spread: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum IdentityKind {
    Abel,
    Ct,
    Combsum,
    Norton,
    Stirling,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AppKind {
    Multtable,
    Farey,
    Tauplus,
    Rho1,
    Em,
}

enum Outcome {
    Ok,
    CheckFailed(String),
}

type CmdResult = Result<Outcome, Error>;

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn need<T>(v: Option<T>, flag: &str) -> Result<T, Error> {
    v.ok_or_else(|| Error::Config(format!("missing --{flag}")))
}

fn checked(ok: bool, what: impl Into<String>) -> Outcome {
    if ok {
        Outcome::Ok
    } else {
        Outcome::CheckFailed(what.into())
    }
}

fn run(cli: Cli) -> CmdResult {
    match cli.cmd {
        Cmd::Count {
            x,
            y,
            z,
            r,
            delta,
            squarefree,
            shift,
        } => {
            let spec = WindowSpec {
                x,
                y,
                z,
                r,
                delta,
                shift,
                squarefree,
            };
            let res = IntervalCounter::default().evaluate(&spec)?;
            println!("x,y,z,r,delta,squarefree,shift,value,elapsed_s");
            println!(
                "{x},{y},{z},{},{},{squarefree},{},{},{:.6}",
                opt(r),
                opt(delta),
                opt(shift),
                res.value,
                res.elapsed
            );
        }
        Cmd::Predict { x, y, z, r } => {
            let (regime, value) = match r {
                Some(r) => ("hr_ratio".to_string(), shape::order_hr_ratio(x, y, z, r)?),
                None => {
                    let p = shape::order_h(x, y, z)?;
                    (format!("{:?}", p.regime), p.value)
                }
            };
            let sp = shape::compute_shape(y, z).ok();
            println!("regime,predicted_ratio,eta,u,beta,xi");
            println!(
                "{regime},{value},{},{},{},{}",
                opt(sp.map(|s| s.eta)),
                opt(sp.map(|s| s.u)),
                opt(sp.map(|s| s.beta)),
                opt(sp.map(|s| s.xi))
            );
        }
        Cmd::Geometry { n, sigma, r } => {
            let g = DivisorGeometry::new(n)?;
            println!("n,sigma,tau,L,L_r,W,I");
            println!(
                "{n},{sigma},{},{},{},{},{}",
                g.tau(),
                g.l_measure(sigma)?,
                g.l_r_measure(sigma, r)?,
                g.w_pairs(sigma)?,
                g.isolated_count(sigma)?
            );
        }
        Cmd::Orderstat { k, u, v, mc, seed } => {
            let spec = BoundarySpec::new(k, u, v)?;
            let q = qk_exact(&spec)?;
            let est = mc.map(|n| mc_estimate(&RegionSpec::s_set(k, u, v), n, seed)).transpose()?;
            println!("k,u,v,w,q_exact,q_mc,stderr");
            println!(
                "{k},{u},{v},{},{q},{},{}",
                spec.w,
                opt(est.map(|e| e.mean)),
                opt(est.map(|e| e.stderr))
            );
        }
        Cmd::Volume {
            kind,
            k,
            v,
            alpha,
            s,
            gamma,
            u,
            m,
            n,
            seed,
            exact,
        } => {
            let region = RegionSpec {
                kind,
                k,
                v,
                alpha,
                s,
                gamma,
                u,
                m,
            };
            let est = mc_estimate(&region, n, seed)?;
            let params: Vec<String> = [("alpha", alpha), ("s", s), ("gamma", gamma), ("u", u)]
                .into_iter()
                .filter_map(|(name, v)| v.map(|v| format!("{name}={v}")))
                .chain(m.map(|m| format!("M={m}")))
                .collect();
            let exact_value = if exact { Some(exact_small_k(&region)?) } else { None };
            print!("kind,k,v,params,mean,stderr,n,seed");
            println!("{}", if exact { ",exact" } else { "" });
            print!("{kind},{k},{v},{},{},{},{n},{seed}", params.join(";"), est.mean, est.stderr);
            println!("{}", exact_value.map(|e| format!(",{e}")).unwrap_or_default());
        }
        Cmd::Blocks { prime_limit, check } => {
            let table = blocks::build_blocks(prime_limit)?;
            println!("j,lambda_j,mu_j,mu_j_minus_j,block_sum");
            for b in &table.blocks {
                println!(
                    "{},{},{},{},{}",
                    b.j,
                    b.lambda,
                    b.mu,
                    b.mu - b.j as f64,
                    b.reciprocal_sum
                );
            }
            if check {
                let rep = blocks::check_muj(&table)?;
                eprintln!(
                    "c3_hat={} deviations={:?} shrink_factors={:?}",
                    rep.c3_hat, rep.deviations, rep.shrink_factors
                );
                return Ok(checked(
                    rep.strictly_decreasing && rep.shrinks_by_1_5,
                    "mu_j - j does not converge geometrically",
                ));
            }
        }
        Cmd::Identity {
            which,
            t,
            a,
            b,
            eps,
            x,
            h,
            m,
            k,
        } => match which {
            IdentityKind::Abel => {
                let (t, a, b) = (need(t, "t")?, need(a, "a")?, need(b, "b")?);
                let c = identities::abel_identity_check(t, &a, &b)?;
                println!("t,a,b,lhs,rhs,equal");
                println!("{t},{a},{b},{},{},{}", c.lhs, c.rhs, c.equal);
                return Ok(checked(c.equal, "Abel identity sides differ"));
            }
            IdentityKind::Ct => {
                let (t, a, b) = (need(t, "t")?, need(a, "a")?, need(b, "b")?);
                let c = identities::c_t_sum(t, &a, &b)?;
                println!("t,a,b,c_t");
                println!("{t},{a},{b},{c}");
            }
            IdentityKind::Combsum => {
                let (t, a, b, e) = (need(t, "t")?, need(a, "a")?, need(b, "b")?, need(eps, "eps")?);
                let r = identities::check_combsum_bound(t, &a, &b, &e)?;
                println!("t,a,b,epsilon,c_t,ratio,holds");
                println!("{t},{a},{b},{e},{},{},{}", r.c_t, r.ratio, r.holds);
                return Ok(checked(r.holds, "C_t bound fails"));
            }
            IdentityKind::Norton => {
                let r = identities::norton_partial_sum(need(x, "x")?, need(h, "h")?, need(m, "m")?)?;
                println!("x,h,m,log_sum,log_comparator,ratio");
                println!(
                    "{},{},{},{},{},{}",
                    r.x, r.h, r.m, r.log_sum, r.log_comparator, r.ratio
                );
            }
            IdentityKind::Stirling => {
                let k = need(k, "k")?;
                println!("k,relative_error");
                println!("{k},{}", identities::stirling_check(k)?);
            }
        },
        Cmd::Apps { which, x, q } => {
            println!("which,arg,value");
            match which {
                AppKind::Multtable => {
                    let x = need(x, "x")?;
                    println!("multtable,{x},{}", apps::mult_table_count(x)?);
                }
                AppKind::Farey => {
                    let q = need(q, "q")?;
                    let n = apps::farey_gap_count(q)?;
                    println!("farey,{q},{n}");
                    if q <= 500 {
                        let adj = apps::farey_gap_count_adjacent(q)?;
                        return Ok(checked(adj == n, format!("adjacency count {adj} != {n}")));
                    }
                }
                AppKind::Tauplus => {
                    let x = need(x, "x")?;
                    println!("tauplus,{x},{}", apps::tau_plus_sum(x)?);
                }
                AppKind::Rho1 => {
                    let x = need(x, "x")?;
                    println!("rho1,{x},{}", apps::rho1_sum(x)?);
                }
                AppKind::Em => {
                    let x = need(x, "x")?;
                    println!("em,{x},{}", apps::erdos_montgomery_sum(x)?);
                }
            }
        }
        Cmd::Run {
            config,
            plot_dir,
            plot_axis,
            max_spread,
        } => {
            let axis: PlotAxis = plot_axis.parse()?;
            let mut configs = harness::load_config(&config)?;
            let mut failures = Vec::new();
            let mut header = true;
            for c in &mut configs {
                if let Some(s) = &cli.store {
                    c.output = Some(s.clone());
                }
                let rows = harness::run_experiment(c)?;
                let csv = harness::rows_to_csv(&rows);
                print!("{}", if header { &csv[..] } else { csv.split_once('\n').map_or("", |p| p.1) });
                header = false;
                let Some(pred) = &c.predictor else { continue };
                let table = RatioTable::from_rows(&c.counter, pred, rows);
                eprint!("[{}]\n{}", c.name, table.summary_csv());
                if let Some(dir) = &plot_dir {
                    std::fs::create_dir_all(dir)?;
                    let data = PlotData::from_ratio_table(&table, axis);
                    if data.series.iter().any(|s| !s.points.is_empty()) {
                        emit_plot_data(&data, &dir.join(&c.name))?;
                    }
                }
                if let (Some(limit), Some(spread)) = (max_spread, table.spread()) {
                    if spread > limit {
                        failures.push(format!("{}: spread {spread} > {limit}", c.name));
                    }
                }
            }
            return Ok(checked(failures.is_empty(), failures.join("; ")));
        }
    }
    Ok(Outcome::Ok)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match run(cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::CheckFailed(why)) => {
            eprintln!("check failed: {why}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
