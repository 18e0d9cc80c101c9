//! The decidability table. Only the row for Turing machines over the
//! rationals is computed; the other rows are reported from the literature.

use std::process::ExitCode;

use serde::{Deserialize, Serialize};

use mandelcert_core::certifier::DecideConfig;
use mandelcert_core::exact_arith::Rational;
use mandelcert_core::rational::{circle_decide, exp_epigraph_witness};
use mandelcert_core::render::{classify_grid, Mode, Viewport};

use crate::{print_json, runtime, CmdResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    /// Established by running the deciders here.
    Checked,
    /// Open; the evidence is a sample, not a proof.
    Open,
    /// Known result, not tested by this program.
    Literature,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Entry {
    pub mark: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub evidence: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Row {
    pub model: String,
    pub circle: Entry,
    pub epigraph: Entry,
    pub mandelbrot: Entry,
}

fn literature(mark: &str, note: &str) -> Entry {
    Entry {
        mark: mark.into(),
        status: Status::Literature,
        evidence: Some(format!("untested; {note}")),
    }
}

fn q(s: &str) -> Rational {
    s.parse().expect("fixed witness parses")
}

fn circle_entry() -> Entry {
    let cases = [
        ("3/5", "4/5", true),
        ("5/13", "12/13", true),
        ("8/17", "-15/17", true),
        ("1", "0", true),
        ("0", "-1", true),
        ("1", "1", false),
        ("1/2", "1/2", false),
        ("3/5", "801/1000", false),
    ];
    let agree = cases
        .iter()
        .filter(|(x, y, on)| circle_decide(&q(x), &q(y)) == *on)
        .count();
    Entry {
        mark: if agree == cases.len() { "✓" } else { "✗" }.into(),
        status: Status::Checked,
        evidence: Some(format!(
            "witness (3/5, 4/5) on the circle; {agree}/{} fixed cases decided correctly",
            cases.len()
        )),
    }
}

fn epigraph_entry() -> Entry {
    let cases = [
        ("0", "1", true),
        ("1", "2", false),
        ("1", "3", true),
        ("-1", "1/2", true),
        ("-1", "1/3", false),
        ("2", "7", false),
        ("2", "15/2", true),
    ];
    let agree = cases
        .iter()
        .filter(|(x, y, above)| exp_epigraph_witness(&q(x), &q(y)).0 == *above)
        .count();
    let (_, order) = exp_epigraph_witness(&q("1"), &q("3"));
    Entry {
        mark: if agree == cases.len() { "✓" } else { "✗" }.into(),
        status: Status::Checked,
        evidence: Some(format!(
            "witness (1, 3) separated at order {order}; {agree}/{} fixed cases decided correctly",
            cases.len()
        )),
    }
}

/// Lattice of rational points used for the open cell.
pub const SAMPLE_SIDE: usize = 33;

fn mandelbrot_entry() -> Result<Entry, crate::Failure> {
    let v = Viewport::square(SAMPLE_SIDE).map_err(runtime)?;
    let grid = classify_grid(&v, &DecideConfig::default(), Mode::Point, None).map_err(runtime)?;
    let c = grid.counts();
    let total = c.out + c.inside + c.unknown;
    Ok(Entry {
        mark: "?".into(),
        status: Status::Open,
        evidence: Some(format!(
            "{total} rational lattice points on [-2,2]^2, budget {}: {} out, {} in, {} unknown \
             (unknown rate {:.4})",
            grid.config.budget,
            c.out,
            c.inside,
            c.unknown,
            c.unknown as f64 / total as f64
        )),
    })
}

pub fn rows() -> Result<Vec<Row>, crate::Failure> {
    Ok(vec![
        Row {
            model: "Markov-computability over computable reals".into(),
            circle: literature("×", "computable functions are continuous"),
            epigraph: literature("×", "computable functions are continuous"),
            mandelbrot: literature("×", "-2 is a limit of points outside the set"),
        },
        Row {
            model: "Blum-Shub-Smale over the reals".into(),
            circle: literature("✓", "polynomial equality test"),
            epigraph: literature("×", "exp is not BSS-computable"),
            mandelbrot: literature("×", "undecidable in the BSS model"),
        },
        Row {
            model: "Turing-computability over the rationals".into(),
            circle: circle_entry(),
            epigraph: epigraph_entry(),
            mandelbrot: mandelbrot_entry()?,
        },
        Row {
            model: "Computable analysis".into(),
            circle: literature("✓", "distance function computable"),
            epigraph: literature("✓", "distance function computable"),
            mandelbrot: literature("?", "computable if the set is locally connected"),
        },
        Row {
            model: "Zeno-computability over computable reals".into(),
            circle: literature("✓", "completed infinite runs are not simulated"),
            epigraph: literature("✓", "completed infinite runs are not simulated"),
            mandelbrot: literature("✓", "completed infinite runs are not simulated"),
        },
    ])
}

pub fn cmd_table(json: bool) -> CmdResult {
    let rows = rows()?;
    if json {
        print_json(&rows)?;
        return Ok(ExitCode::SUCCESS);
    }
    let width = rows.iter().map(|r| r.model.chars().count()).max().unwrap_or(0);
    println!("{:width$}  circle  y>=e^x  mandelbrot", "model");
    for r in &rows {
        let cell = |e: &Entry| {
            let tag = match e.status {
                Status::Literature => "lit",
                Status::Checked | Status::Open => "run",
            };
            format!("{} {tag}", e.mark)
        };
        println!(
            "{:width$}  {:6}  {:6}  {}",
            r.model,
            cell(&r.circle),
            cell(&r.epigraph),
            cell(&r.mandelbrot)
        );
    }
    println!();
    for r in rows.iter().filter(|r| r.circle.status == Status::Checked) {
        for (name, e) in [
            ("circle", &r.circle),
            ("y>=e^x", &r.epigraph),
            ("mandelbrot", &r.mandelbrot),
        ] {
            if let Some(ev) = &e.evidence {
                println!("{name}: {ev}");
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
