use std::path::PathBuf;

use clap::Args;
use primewin::admissible::{
    build_admissible, is_admissible, verify_properties, AdmissibleSet, Variant,
};
use primewin::Result;

use crate::exit::Outcome;
use crate::output::Out;

#[derive(Args, Debug)]
pub struct AdmissibleArgs {
    /// Number of elements, 2 to 8.
    #[arg(long)]
    k: usize,

    /// lemma22 (K = 4 * primes below 2k) or lemma31 (primes below 4k).
    #[arg(long, default_value = "lemma22")]
    variant: String,

    /// Write the set here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn describe(set: &AdmissibleSet) -> String {
    let short = set.h.iter().all(|h| h.bits() <= 64);
    let h = if short {
        let vals: Vec<String> = set.h.iter().map(ToString::to_string).collect();
        format!("H = {{{}}}", vals.join(", "))
    } else {
        format!("h_k has {} bits", set.diameter().bits())
    };
    format!(
        "k = {}, variant {}, K = {}, {h}, {} witnesses",
        set.k,
        set.variant,
        set.modulus,
        set.witnesses.len()
    )
}

pub fn run(args: AdmissibleArgs) -> Result<Outcome> {
    let variant: Variant = args.variant.parse()?;
    let set = build_admissible(args.k, variant)?;
    let mut report = verify_properties(&set)?;
    let admissible = is_admissible(&set.h)?;
    report.record(
        "is_admissible",
        (!admissible).then(|| "some prime covers every residue class".to_string()),
    );
    match &args.out {
        Some(path) => std::fs::write(path, set.to_json())?,
        None => {
            Out::new().line(&set.to_json())?;
        }
    }
    eprintln!("{}", describe(&set));
    eprint!("{report}");
    Ok(Outcome::from_report(report.all_passed()))
}
