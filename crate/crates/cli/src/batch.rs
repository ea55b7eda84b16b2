//! Classification of a CSV of curves, one result line per input row.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::Args;
use serde::{Deserialize, Serialize};

use relserre::adelic::{self, ClassificationInput, OddMode};
use relserre::cyclicity::{self, format_rational};
use relserre::ellq::CurveModel;

#[derive(Args)]
pub struct BatchArgs {
    /// CSV with header `name,a1,a2,a3,a4,a6,label` (label may be empty or the column absent).
    input: PathBuf,
    /// Write result rows here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = adelic::DEFAULT_PRIME_BOUND)]
    prime_bound: u64,
    #[arg(long)]
    attested: bool,
    #[arg(long)]
    json: bool,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Deserialize)]
struct Row {
    name: String,
    a1: String,
    a2: String,
    a3: String,
    a4: String,
    a6: String,
    #[serde(default)]
    label: Option<String>,
}

#[derive(Serialize, Clone, Default)]
pub struct Outcome {
    pub line: u64,
    pub name: String,
    pub status: String,
    pub mod2_class: String,
    pub two_adic_label: String,
    pub is_relative_serre: String,
    pub adelic_index: String,
    pub image_conductor: String,
    pub correction_factor: String,
    pub detail: String,
}

#[derive(Serialize, Default)]
pub struct Summary {
    pub rows: usize,
    pub errors: usize,
    pub relative_serre: usize,
    /// Classified rows per mod-2 class.
    pub by_class: BTreeMap<String, usize>,
}

fn classify_row(line: u64, row: &Row, prime_bound: u64, attested: bool) -> Outcome {
    let mut out = Outcome { line, name: row.name.clone(), ..Outcome::default() };
    let res = (|| -> relserre::Result<Outcome> {
        let coeffs = [&row.a1, &row.a2, &row.a3, &row.a4, &row.a6].map(|s| s.trim()).join(",");
        let curve = CurveModel::parse(&coeffs)?.named(&row.name);
        let mut input = ClassificationInput::new(curve);
        input.label = row.label.as_deref().map(str::trim).filter(|s| !s.is_empty()).map(str::parse).transpose()?;
        input.prime_bound = prime_bound;
        input.mode = if attested { OddMode::Attested } else { OddMode::Certified { bound: prime_bound } };
        let r = adelic::is_relative_serre(&input)?;
        let mut o = out.clone();
        o.status = "ok".into();
        o.mod2_class = r.mod2_class.clone();
        o.two_adic_label = r.two_adic_label.map(|l| l.to_string()).unwrap_or_default();
        o.is_relative_serre = r.is_relative_serre.to_string();
        o.adelic_index = r.adelic_index.map(|i| i.to_string()).unwrap_or_default();
        o.image_conductor = r.image_conductor.map(|m| m.to_string()).unwrap_or_default();
        o.correction_factor = cyclicity::correction_factor(&input.curve, &r).map(|c| format_rational(&c)).unwrap_or_default();
        if !r.certification.unknown.is_empty() {
            o.detail = format!("uncertified at {:?}", r.certification.unknown);
        }
        Ok(o)
    })();
    match res {
        Ok(o) => o,
        Err(e) => {
            out.status = "error".into();
            out.detail = e.to_string();
            out
        }
    }
}

/// Classifies all rows with a worker pool; results come back in input order.
pub fn process(text: &str, prime_bound: u64, attested: bool, jobs: usize) -> (Vec<Outcome>, Summary) {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut rows: Vec<(u64, std::result::Result<Row, String>)> = Vec::new();
    for (i, rec) in rdr.deserialize::<Row>().enumerate() {
        // header is line 1
        rows.push((i as u64 + 2, rec.map_err(|e| format!("parse error: {e}"))));
    }
    let results: Vec<Mutex<Option<Outcome>>> = rows.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|s| {
        for _ in 0..jobs.max(1) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some((line, row)) = rows.get(i) else { break };
                let o = match row {
                    Ok(r) => classify_row(*line, r, prime_bound, attested),
                    Err(e) => Outcome { line: *line, status: "error".into(), detail: e.clone(), ..Outcome::default() },
                };
                *results[i].lock().unwrap() = Some(o);
            });
        }
    });
    let outcomes: Vec<Outcome> = results.into_iter().map(|m| m.into_inner().unwrap().expect("every row processed")).collect();
    let mut summary = Summary { rows: outcomes.len(), ..Summary::default() };
    for o in &outcomes {
        if o.status == "error" {
            summary.errors += 1;
            continue;
        }
        *summary.by_class.entry(o.mod2_class.clone()).or_default() += 1;
        if o.is_relative_serre == "true" {
            summary.relative_serre += 1;
        }
    }
    (outcomes, summary)
}

#[derive(Serialize)]
struct JsonOut<'a> {
    rows: &'a [Outcome],
    summary: &'a Summary,
}

pub fn run(a: &BatchArgs) -> anyhow::Result<()> {
    let text = std::fs::read_to_string(&a.input)
        .map_err(|e| relserre::Error::Parse(format!("{}: {e}", a.input.display())))?;
    let jobs = a.jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let (outcomes, summary) = process(&text, a.prime_bound, a.attested, jobs);
    let mut sink: Box<dyn Write> = match &a.out {
        Some(p) => Box::new(std::fs::File::create(p)?),
        None => Box::new(std::io::stdout()),
    };
    if a.json {
        let v = serde_json::to_value(JsonOut { rows: &outcomes, summary: &summary })?;
        writeln!(sink, "{}", serde_json::to_string_pretty(&v)?)?;
    } else {
        let mut w = csv::Writer::from_writer(sink);
        for o in &outcomes {
            w.serialize(o)?;
        }
        w.flush()?;
    }
    for o in outcomes.iter().filter(|o| o.status == "error") {
        eprintln!("line {}: {}: {}", o.line, o.name, o.detail);
    }
    let classes: Vec<String> = summary.by_class.iter().map(|(k, v)| format!("{k}={v}")).collect();
    eprintln!(
        "summary: rows={} {} relative_serre={} errors={}",
        summary.rows,
        classes.join(" "),
        summary.relative_serre,
        summary.errors
    );
    Ok(())
}
