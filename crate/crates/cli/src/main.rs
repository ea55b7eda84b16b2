//! `relserre`: classify curves, build adelic images, evaluate cyclicity constants.

mod batch;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use relserre::adelic::{self, ClassificationInput, ClassificationResult, OddMode};
use relserre::cyclicity::{self, format_rational, CyclicityConstant, DEFAULT_EULER_BOUND};
use relserre::ellq::CurveModel;
use relserre::paperdata::{self, verify};
use relserre::Error;

#[derive(Parser)]
#[command(name = "relserre", version, about = "Serre curves relative to the mod-2 obstructions 2Cs, 2B, 2Cn")]
struct Cli {
    /// Directory holding groups.dat (and optionally appendix.csv) replacing the bundled data.
    #[arg(long, global = true, value_name = "DIR")]
    data: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args, Clone)]
struct CurveArgs {
    /// Weierstrass coefficients "a1,a2,a3,a4,a6" or short form "A,B".
    #[arg(long)]
    curve: String,
    /// Name shown in the output.
    #[arg(long)]
    name: Option<String>,
    /// 2-adic image label A.B.C.D; inferred from Frobenius data when absent.
    #[arg(long)]
    label: Option<String>,
    /// Primes used for candidate elimination and for the odd-prime sieve.
    #[arg(long, default_value_t = adelic::DEFAULT_PRIME_BOUND)]
    prime_bound: u64,
    /// Take surjectivity at odd primes as given instead of sieving for it.
    #[arg(long)]
    attested: bool,
    #[arg(long)]
    json: bool,
}

impl CurveArgs {
    fn input(&self) -> relserre::Result<ClassificationInput> {
        let mut curve = CurveModel::parse(&self.curve)?;
        if let Some(n) = &self.name {
            curve = curve.named(n);
        }
        let mut input = ClassificationInput::new(curve);
        input.label = self.label.as_deref().map(str::parse).transpose()?;
        input.prime_bound = self.prime_bound;
        input.mode = if self.attested { OddMode::Attested } else { OddMode::Certified { bound: self.prime_bound } };
        Ok(input)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether the curve is relative Serre and report m_E and the image.
    Classify(CurveArgs),
    /// Print generators and the defining predicate of G_E(m_E).
    Image(CurveArgs),
    /// Correction factor and cyclicity constant.
    Cyclicity {
        #[command(flatten)]
        curve: CurveArgs,
        /// Truncation point of the Euler product.
        #[arg(short = 'L', default_value_t = DEFAULT_EULER_BOUND)]
        euler_bound: u64,
        /// Also count cyclic reductions for good primes up to this bound.
        #[arg(long, value_name = "X")]
        empirical: Option<u64>,
    },
    /// Recompute the group-theoretic facts behind the classification.
    Verify {
        /// msets, quo, comm, sg, 2bmod4 or all (comma separated).
        #[arg(long, default_value = "all")]
        suite: String,
    },
    /// Classify every row of a CSV file `name,a1,a2,a3,a4,a6,label`.
    Batch(batch::BatchArgs),
}

/// Canonical JSON: keys sorted, so parsing and re-printing reproduces the text.
pub(crate) fn print_json<T: Serialize>(x: &T) -> anyhow::Result<()> {
    let v = serde_json::to_value(x)?;
    writeln!(std::io::stdout().lock(), "{}", serde_json::to_string_pretty(&v)?)?;
    Ok(())
}

#[derive(Serialize)]
struct ClassifyOutput<'a> {
    #[serde(flatten)]
    result: &'a ClassificationResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    correction_factor: Option<String>,
}

fn human_classification(r: &ClassificationResult) {
    println!("curve:             {}", r.curve);
    println!("mod-2 class:       {}", r.mod2_class);
    if let Some(l) = r.two_adic_label {
        println!("2-adic label:      {l} ({})", r.label_source.unwrap_or("supplied"));
    }
    let verdict = format!("{}-Serre: {}", r.mod2_class, r.is_relative_serre);
    println!("verdict:           {verdict}");
    let c = &r.certification;
    match c.bound {
        Some(b) => println!(
            "odd primes:        certified up to {} with p <= {b}{}",
            c.heuristic_beyond.unwrap_or(0),
            if c.unknown.is_empty() { String::new() } else { format!(", unknown at {:?}", c.unknown) }
        ),
        None => println!("odd primes:        attested"),
    }
    if let Some(i) = r.adelic_index {
        println!("adelic index:      {i}");
    }
    if let Some(m) = r.image_conductor {
        println!("m_E:               {m}");
    }
    if let Some(e) = &r.entanglements {
        for q in e.quadratic() {
            println!("entanglement:      N = {}, N' = {}, k = {}", q.n, q.n_prime, q.k);
        }
        if let Some(f) = e.cubic_conductor() {
            println!("cubic conductor:   {f}");
        }
    }
    if let Some(o) = &r.image_order {
        println!("|G_E(m_E)|:        {o}");
    }
    if let Some(g) = &r.image_generators {
        println!("generators:        {}", g.join("; "));
    }
}

fn correction_string(curve: &CurveModel, r: &ClassificationResult) -> Option<String> {
    cyclicity::correction_factor(curve, r).ok().map(|c| format_rational(&c))
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let data = cli.data.or_else(|| std::env::var_os("RELSERRE_DATA").map(PathBuf::from));
    if let Some(dir) = data {
        paperdata::install_data_dir(&dir)?;
    }
    // surface a broken data file before doing any work
    paperdata::bundled()?;
    match cli.cmd {
        Command::Classify(a) => {
            let input = a.input()?;
            let (r, _) = adelic::classify_with_image(&input)?;
            let corr = correction_string(&input.curve, &r);
            if a.json {
                print_json(&ClassifyOutput { result: &r, correction_factor: corr })?;
            } else {
                human_classification(&r);
                if let Some(c) = corr {
                    println!("correction factor: {c}");
                }
            }
        }
        Command::Image(a) => {
            let input = a.input()?;
            let r = adelic::is_relative_serre(&input)?;
            let img = adelic::adelic_image(&input, &r)?;
            if a.json {
                print_json(&img)?;
            } else {
                println!("modulus:     {}", img.modulus);
                println!("order:       {}", img.order);
                println!("index:       {}", img.index);
                println!("candidates:  {}", img.candidates);
                if let Some(c) = img.coverage {
                    println!("coverage:    {c:.3}");
                }
                for c in &img.predicate.conditions {
                    println!("condition:   {} (2-adic level {}, modulus {})", c.character, c.two_adic_level, c.dirichlet_modulus);
                }
                for g in &img.generators {
                    println!("generator:   {g}");
                }
            }
        }
        Command::Cyclicity { curve: a, euler_bound, empirical } => {
            let input = a.input()?;
            let (r, img) = adelic::classify_with_image(&input)?;
            let constant = cyclicity::cyclicity_constant(&input.curve, &r, euler_bound)?;
            let characters = match &img {
                Some(img) if r.obstruction != Some(relserre::paperdata::Obstruction::Cs) => {
                    Some(format_rational(&cyclicity::general_correction_via_characters(img)?))
                }
                _ => None,
            };
            let emp = match empirical {
                Some(x) => cyclicity::empirical_cyclicity(&input.curve, x)?,
                None => None,
            };
            let out = CyclicityOutput {
                curve: r.curve.clone(),
                correction_factor: correction_string(&input.curve, &r),
                correction_factor_characters: characters,
                cyclicity_constant: constant,
                empirical: emp.map(|(c, t)| Empirical { x: empirical.unwrap(), cyclic: c, good_primes: t }),
            };
            if a.json {
                print_json(&out)?;
            } else {
                println!("curve:             {}", out.curve);
                if let Some(c) = &out.correction_factor {
                    println!("correction factor: {c}");
                }
                if let Some(c) = &out.correction_factor_characters {
                    println!("character sum:     {c}");
                }
                let k = &out.cyclicity_constant;
                println!("prefactor:         {}", format_rational(&k.prefactor));
                println!("Euler product:     {:.15} (L = {}, |log tail| <= {:.3e})", k.euler_product, k.bound, k.tail_bound);
                println!("C_E:               {:.15}", k.value);
                if let Some(e) = &out.empirical {
                    println!("empirical:         {}/{} = {:.6} (p <= {})", e.cyclic, e.good_primes, e.cyclic as f64 / e.good_primes as f64, e.x);
                }
            }
        }
        Command::Verify { suite } => {
            let mut ok = true;
            for s in verify::parse_suites(&suite)? {
                let report = s.run()?;
                print!("{report}");
                ok &= report.passed();
            }
            if !ok {
                return Err(Error::Inconsistency("verification failed".into()).into());
            }
        }
        Command::Batch(a) => batch::run(&a)?,
    }
    Ok(())
}

#[derive(Serialize)]
struct Empirical {
    x: u64,
    cyclic: u64,
    good_primes: u64,
}

#[derive(Serialize)]
struct CyclicityOutput {
    curve: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    correction_factor: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    correction_factor_characters: Option<String>,
    cyclicity_constant: CyclicityConstant,
    #[serde(skip_serializing_if = "Option::is_none")]
    empirical: Option<Empirical>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        // a closed pipe (e.g. `| head`) is not a failure
        Err(e) if e.downcast_ref::<std::io::Error>().is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe) => {
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            let code = e.downcast_ref::<Error>().map_or(1, Error::exit_code);
            ExitCode::from(code as u8)
        }
    }
}
