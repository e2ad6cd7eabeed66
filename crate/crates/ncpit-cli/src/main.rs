//! `ncpit`: analysis, transformation and identity testing of non-commutative circuits.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use ncpit::circuit::{canonicalize, check_upt, expand, preimage_width, shape_set, Shape, DEFAULT_MAX_TERMS};
use ncpit::const_width::known_shape_pit;
use ncpit::depth::{collapse_to_shuffle, depth_reduce};
use ncpit::fewpt::fewpt_pit_circuit;
use ncpit::generate::{random_fewpt_circuit, random_product_shape, random_upt_circuit, with_random_sums, Abp, UptParams};
use ncpit::hard;
use ncpit::hitting::{pit_circuit, HittingSet, Verdict};
use ncpit::{Circuit, CircuitBuilder, Fp, Perm};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

#[derive(Parser)]
#[command(name = "ncpit", version, about = "Non-commutative polynomial identity testing")]
struct Cli {
    /// Field prime.
    #[arg(long, global = true, env = ncpit::field::PRIME_ENV)]
    prime: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Seed for randomized commands.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Monomial cap for symbolic expansion.
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_TERMS)]
    max_terms: usize,
    /// Largest shape count enumerated before giving up.
    #[arg(long, global = true, default_value_t = 64)]
    k_max: usize,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Report size, degree, shapes, UPT verdict and preimage-width.
    Analyze { path: PathBuf },
    /// Rewrite a circuit so that every gate has a single type.
    Canonicalize {
        path: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Logarithmic-depth circuit for a shuffling of a UPT circuit's polynomial.
    DepthReduce {
        path: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Keep the positional products instead of collapsing to a shuffle.
        #[arg(long)]
        otimes: bool,
    },
    /// Decide whether a circuit computes the zero polynomial.
    Pit {
        path: PathBuf,
        #[arg(long, value_enum, default_value_t = Model::Upt)]
        model: Model,
        /// Shape file (nested JSON arrays) for the known-shape model.
        #[arg(long)]
        shape: Option<PathBuf>,
        /// Promised preimage-width (default: measured).
        #[arg(long)]
        w: Option<usize>,
        /// Shape bound for the FewPT model.
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Points tried before a scale guard.
        #[arg(long, default_value_t = 1 << 24)]
        max_points: u128,
    },
    /// Describe or emit the UPT hitting set.
    HittingSet {
        #[arg(long, value_enum, default_value_t = SetModel::Upt)]
        model: SetModel,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        w: usize,
        #[arg(long)]
        r: usize,
        /// Write all points as TSV.
        #[arg(long)]
        emit: Option<PathBuf>,
        /// Largest set written by --emit.
        #[arg(long, default_value_t = 1 << 20)]
        limit: u128,
    },
    /// Emit a hard polynomial or its circuit.
    HardPoly {
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long, value_enum, default_value_t = Emit::Poly)]
        emit: Emit,
        #[arg(long, default_value_t = 2)]
        n: usize,
        /// Degree (pal, movpal) or tree depth (treecolor).
        #[arg(long, default_value_t = 4)]
        d: usize,
        /// Colours (treecolor).
        #[arg(long, default_value_t = 2)]
        m: usize,
        /// Print partition ranks instead of the object.
        #[arg(long)]
        ranks: bool,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Generate a random circuit; the seed fixes the output.
    Gen {
        #[arg(long, value_enum, default_value_t = GenFamily::Upt)]
        family: GenFamily,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 4)]
        d: usize,
        #[arg(long, default_value_t = 2)]
        w: usize,
        /// Shapes in a FewPT circuit.
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Probability of a `+` node above each shape node.
        #[arg(long, default_value_t = 0.3)]
        sums: f64,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Quick end-to-end checks of every pipeline.
    Selftest,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq, Debug)]
enum Model {
    Whitebox,
    Upt,
    KnownShape,
    Fewpt,
}

#[derive(Clone, Copy, ValueEnum)]
enum SetModel {
    Upt,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Pal,
    Movpal,
    Treecolor,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Emit {
    Poly,
    Circuit,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenFamily {
    Upt,
    Fewpt,
    Abp,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(3) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<ncpit::Error>() {
        Some(ne) if ne.is_scale_guard() => 2,
        _ => 3,
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    if let Some(q) = cli.prime {
        ncpit::field::set_modulus(q)?;
    }
    if let Some(j) = cli.jobs {
        rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build_global()?;
    }
    let mut stdout = std::io::stdout().lock();
    match cli.cmd {
        Cmd::Analyze { path } => {
            let c = read_circuit(&path)?;
            write!(stdout, "{}", analyze(&c, cli.k_max)?)?;
        }
        Cmd::Canonicalize { path, out } => {
            let c = canonicalize(&read_circuit(&path)?)?;
            emit(out.as_deref(), &c.to_text())?;
        }
        Cmd::DepthReduce { path, out, otimes } => {
            let c = canonicalize(&read_circuit(&path)?)?;
            check_upt(&c)?;
            let cx = depth_reduce(&c)?;
            let (plain, sigma) = collapse_to_shuffle(&cx)?;
            let text = if otimes { cx.to_text() } else { plain.to_text() };
            let summary = format!("{}\ndepth: {} -> {}\n", sigma_line(&sigma), c.depth(), plain.depth());
            match out {
                Some(p) => {
                    write_file(&p, &text)?;
                    write!(stdout, "{summary}")?;
                }
                None => {
                    write!(stdout, "{text}")?;
                    eprint!("{summary}");
                }
            }
        }
        Cmd::Pit { path, model, shape, w, k, max_points } => {
            let c = read_circuit(&path)?;
            let shape = match shape {
                Some(p) => Some(Shape::from_json(&read(&p)?)?),
                None => None,
            };
            let report = pit(&c, model, shape.as_ref(), w, k, max_points, cli.max_terms)?;
            write!(stdout, "{report}")?;
        }
        Cmd::HittingSet { model: SetModel::Upt, n, d, w, r, emit, limit } => {
            let hs = HittingSet::new(n, d, w, r)?;
            writeln!(stdout, "model: upt\nn: {n}\nd: {d}\nw: {w}\nr: {r}")?;
            writeln!(stdout, "primes: {}\na_size: {}\ncardinality: {}", hs.primes().len(), hs.a_size(), hs.cardinality())?;
            if let Some(p) = emit {
                let card = hs.cardinality();
                if card > limit {
                    return Err(ncpit::Error::ScaleGuard(format!("{card} points exceed the limit {limit}")).into());
                }
                let lines: Vec<String> = (0..card as u64)
                    .into_par_iter()
                    .map(|i| {
                        let pt = hs.point_at(i as u128);
                        pt.iter().map(|v| v.value().to_string()).collect::<Vec<_>>().join("\t")
                    })
                    .collect();
                let mut text = lines.join("\n");
                text.push('\n');
                write_file(&p, &text)?;
                writeln!(stdout, "wrote: {}", p.display())?;
            }
        }
        Cmd::HardPoly { family, emit: what, n, d, m, ranks, out } => {
            let text = if ranks { hard_ranks(family, n, d, m)? } else { hard_poly(family, what, n, d, m)? };
            emit_to(out.as_deref(), &text)?;
        }
        Cmd::Gen { family, n, d, w, k, sums, out } => {
            let c = generate(family, cli.seed, n, d, w, k, sums)?;
            emit(out.as_deref(), &c.to_text())?;
        }
        Cmd::Selftest => {
            let ok = selftest(&mut stdout)?;
            return Ok(if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE });
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_circuit(path: &Path) -> Result<Circuit> {
    let text = read(path)?;
    Circuit::from_text(&text).with_context(|| format!("parsing {}", path.display()))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    emit_to(out, text)
}

fn emit_to(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => write_file(p, text),
        None => {
            std::io::stdout().lock().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn sigma_line(sigma: &Perm) -> String {
    let parts: Vec<String> = sigma.images().iter().enumerate().map(|(i, s)| format!("{} -> {s}", i + 1)).collect();
    format!("sigma: {}", parts.join(", "))
}

fn analyze(c: &Circuit, k_max: usize) -> Result<String> {
    let mut out = String::new();
    let shapes = match shape_set(c, k_max) {
        Ok(s) => Some(s),
        Err(e) if e.is_scale_guard() => None,
        Err(e) => return Err(e.into()),
    };
    let count = shapes.as_ref().map_or(format!("more than {k_max}"), |s| s.len().to_string());
    let upt = shapes.as_ref().is_some_and(|s| s.len() <= 1);
    let plural = if shapes.as_ref().is_some_and(|s| s.len() == 1) { "shape" } else { "shapes" };
    out += &format!("{}, {count} {plural}\n", if upt { "UPT" } else { "not UPT" });
    out += &format!("n: {}\nsize: {}\ndegree: {}\ndepth: {}\nshapes: {count}\n", c.n(), c.size(), c.degree(), c.depth());
    out += &format!("upt: {}\n", if upt { "yes" } else { "no" });
    if upt && c.root().is_some() {
        let canon = canonicalize(c)?;
        out += &format!("width: {}\n", preimage_width(&canon)?);
        let shape = check_upt(c)?;
        if let Ok(json) = shape.to_json() {
            out += &format!("shape: {json}\n");
        }
    }
    Ok(out)
}

fn verdict_word(nonzero: bool) -> &'static str {
    if nonzero {
        "nonzero"
    } else {
        "zero"
    }
}

fn pit(
    c: &Circuit,
    model: Model,
    shape: Option<&Shape>,
    w: Option<usize>,
    k: usize,
    max_points: u128,
    max_terms: usize,
) -> Result<String> {
    let name = model.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default();
    let mut out = format!("model: {name}\n");
    let whitebox = |c: &Circuit| -> Result<bool> { Ok(c.root().is_some() && !expand(c, max_terms)?.is_zero()) };
    match model {
        Model::Whitebox => {
            out += &format!("verdict: {}\n", verdict_word(whitebox(c)?));
        }
        Model::Upt => {
            let c = canonicalize(c)?;
            if c.root().is_none() || c.degree() == 0 {
                out += &format!("verdict: {}\n", verdict_word(whitebox(&c)?));
                return Ok(out);
            }
            let t = check_upt(&c)?;
            let width = preimage_width(&c)?;
            let w = w.unwrap_or(width);
            if width > w {
                bail!(ncpit::Error::InvalidArgument(format!("preimage-width {width} exceeds the promised {w}")));
            }
            let hs = HittingSet::new(c.n(), c.degree(), w, t.product_height())?;
            let v = pit_circuit(&c, &hs, max_points)?;
            out += &format!("verdict: {}\n", verdict_word(!v.is_zero()));
            if let Verdict::NonZero(i) = v {
                out += &format!("witness: {i}\n");
            }
            out += &format!("width: {width}\nlevels: {}\ncardinality: {}\n", t.product_height(), hs.cardinality());
        }
        Model::KnownShape => {
            let c = canonicalize(c)?;
            if c.root().is_none() {
                out += "verdict: zero\n";
                return Ok(out);
            }
            let t = match shape {
                Some(t) => t.clone(),
                None => check_upt(&c)?,
            };
            let w = match w {
                Some(w) => w,
                None => preimage_width(&c)?,
            };
            let rep = known_shape_pit(&c, &t, w)?;
            out += &format!("verdict: {}\n", verdict_word(rep.nonzero));
            out += &format!(
                "width: {}\nlevels: {}\ndegree_bound: {}\nmax_image_degree: {}\npoints: {}\n",
                rep.width, rep.depth, rep.degree_bound, rep.max_image_degree, rep.points_evaluated
            );
        }
        Model::Fewpt => {
            let rep = fewpt_pit_circuit(c, k, max_points)?;
            out += &format!("verdict: {}\n", verdict_word(!rep.verdict.is_zero()));
            if let Verdict::NonZero(i) = rep.verdict {
                out += &format!("witness: {i}\n");
            }
            out += &format!(
                "shapes: {}\nwidth: {}\nlevels: {}\nbudget: {}\ncardinality: {}\n",
                rep.shapes, rep.width, rep.levels, rep.budget, rep.cardinality
            );
        }
    }
    Ok(out)
}

fn hard_poly(family: Family, what: Emit, n: usize, d: usize, m: usize) -> Result<String> {
    Ok(match (family, what) {
        (Family::Pal, Emit::Poly) => hard::palindrome(n, d)?.0.to_text()?,
        (Family::Pal, Emit::Circuit) => hard::palindrome(n, d)?.1.to_text(),
        (Family::Movpal, Emit::Poly) => hard::moving_palindrome(n, d)?.to_text()?,
        (Family::Movpal, Emit::Circuit) => hard::moving_palindrome_circuit(n, d)?.to_text(),
        (Family::Treecolor, Emit::Circuit) => hard::tree_coloring_circuit(m, d)?.to_text(),
        (Family::Treecolor, Emit::Poly) => hard::tree_coloring_poly(m, d)?.1.to_text()?,
    })
}

fn hard_ranks(family: Family, n: usize, d: usize, m: usize) -> Result<String> {
    let f = match family {
        Family::Pal => hard::palindrome(n, d)?.0,
        Family::Movpal => hard::moving_palindrome(n, d)?,
        Family::Treecolor => hard::tree_coloring_poly(m, d)?.1,
    };
    let deg = f.degree_or_err()?.unwrap_or(0);
    let mut out = format!("degree: {deg}\nmonomials: {}\n", f.len());
    let half = hard::partial_derivative_matrix(&f, deg / 2)?;
    out += &format!("prefix_rank({}): {} of {}x{}\n", deg / 2, half.rank, half.rows, half.cols);
    if let Family::Movpal = family {
        for i in hard::movpal_probe_degrees(deg) {
            let (rank, set) = hard::min_partition_rank(&f, i)?;
            out += &format!("min_partition_rank({i}): {rank} at {set:?}\n");
        }
    }
    if (2..=hard::MAX_SWEEP_DEGREE).contains(&deg) {
        let k = hard::alternating_k(deg).min(deg - 1).max(1);
        let s = hard::shuffled_rank_sweep(&f, k)?;
        out += &format!("shuffled_rank({k}): min {} max {} over {} shufflings\n", s.min_rank, s.max_rank, s.permutations);
    }
    Ok(out)
}

fn distinct_shapes(rng: &mut ChaCha8Rng, d: usize, k: usize, sums: f64) -> Result<Vec<Shape>> {
    let mut shapes: Vec<Shape> = Vec::new();
    for _ in 0..64 * k {
        if shapes.len() == k {
            break;
        }
        let base = random_product_shape(rng, d);
        let s = with_random_sums(rng, &base, sums);
        if !shapes.iter().any(|t| t.collapsed() == s.collapsed()) {
            shapes.push(s);
        }
    }
    if shapes.len() < k {
        bail!(ncpit::Error::InvalidArgument(format!("could not draw {k} distinct shapes of degree {d}")));
    }
    Ok(shapes)
}

fn generate(family: GenFamily, seed: u64, n: usize, d: usize, w: usize, k: usize, sums: f64) -> Result<Circuit> {
    if d == 0 || n == 0 || w == 0 {
        bail!(ncpit::Error::InvalidArgument("n, d and w must be positive".into()));
    }
    if !(0.0..=1.0).contains(&sums) {
        bail!(ncpit::Error::InvalidArgument("--sums must lie in [0, 1]".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = UptParams::new(n, w);
    Ok(match family {
        GenFamily::Upt => {
            let base = random_product_shape(&mut rng, d);
            let s = with_random_sums(&mut rng, &base, sums);
            random_upt_circuit(&mut rng, &s, &params)?
        }
        GenFamily::Fewpt => {
            let shapes = distinct_shapes(&mut rng, d, k, sums)?;
            random_fewpt_circuit(&mut rng, &shapes, &params)?
        }
        GenFamily::Abp => {
            let abp = Abp::random(&mut rng, n, d, w);
            abp.to_circuit().unwrap_or_else(|| Circuit::zero(n))
        }
    })
}

fn cancelling_circuit() -> Result<Circuit> {
    let mut b = CircuitBuilder::new(2);
    let (x1, x2) = (b.var(1), b.var(2));
    let g = b.times(x1, x2);
    let root = b.plus_weighted(&[(g, Fp::ONE), (g, -Fp::ONE)]);
    Ok(b.finish(root)?)
}

fn selftest(out: &mut impl std::io::Write) -> Result<bool> {
    let checks: Vec<(&str, fn() -> Result<String>)> = vec![
        ("figure circuits", || {
            let a = analyze(&ncpit::generate::sample_upt_circuit(), 8)?;
            let c = analyze(&ncpit::generate::sample_two_shape_circuit(), 8)?;
            let e = analyze(&Circuit::empty(2), 8)?;
            if !a.starts_with("UPT, 1 shape") || !c.starts_with("not UPT, 2 shapes") || !e.contains("degree: 0") {
                bail!("unexpected analysis");
            }
            Ok("UPT with 1 shape, 2 shapes, empty circuit of degree 0".into())
        }),
        ("depth reduction", || {
            for seed in 0..40 {
                let c = canonicalize(&generate(GenFamily::Upt, seed, 2, 1 + seed as usize % 16, 3, 1, 0.3)?)?;
                let (plain, sigma) = collapse_to_shuffle(&depth_reduce(&c)?)?;
                let want = expand(&c, DEFAULT_MAX_TERMS)?.shuffle(&sigma)?;
                if expand(&plain, DEFAULT_MAX_TERMS)? != want {
                    bail!("seed {seed}: shuffled polynomial differs");
                }
            }
            Ok("40 circuits exact".into())
        }),
        ("palindrome is nonzero", || {
            let (_, c) = hard::palindrome(2, 8)?;
            let r = pit(&c, Model::Upt, None, None, 1, 1 << 24, DEFAULT_MAX_TERMS)?;
            if !r.contains("verdict: nonzero") {
                bail!("upt model missed Pal_8");
            }
            Ok("upt model reports nonzero".into())
        }),
        ("cancellation is zero", || {
            let c = cancelling_circuit()?;
            for model in [Model::Whitebox, Model::Upt, Model::KnownShape, Model::Fewpt] {
                let r = pit(&c, model, None, None, 1, 1 << 24, DEFAULT_MAX_TERMS)?;
                if !r.contains("verdict: zero") {
                    bail!("{model:?} reported nonzero");
                }
            }
            Ok("zero under all four models".into())
        }),
        ("generator round trip", || {
            for seed in 0..3 {
                let c = generate(GenFamily::Upt, seed, 2, 6, 2, 1, 0.3)?;
                let text = c.to_text();
                if Circuit::from_text(&text)?.to_text() != text || generate(GenFamily::Upt, seed, 2, 6, 2, 1, 0.3)? != c {
                    bail!("seed {seed} not reproducible");
                }
                check_upt(&c)?;
            }
            Ok("3 seeds byte-identical and UPT".into())
        }),
        ("palindrome shuffle identity", || {
            let (f, _) = hard::palindrome(2, 6)?;
            if f.shuffle(&hard::palindrome_interleave(6)?)? != hard::square_sum_power(2, 3)? {
                bail!("identity fails");
            }
            Ok("shuffled Pal_6 equals (x1x1 + x2x2)^3".into())
        }),
    ];
    let mut ok = true;
    for (name, check) in checks {
        match check() {
            Ok(detail) => writeln!(out, "[PASS] {name}: {detail}")?,
            Err(e) => {
                ok = false;
                writeln!(out, "[FAIL] {name}: {e:#}")?;
            }
        }
    }
    Ok(ok)
}
