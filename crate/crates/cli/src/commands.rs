//! One handler per subcommand. Handlers parse their inputs, call into the
//! core library and assemble the report; printing happens in `main`.

use std::path::Path;
use std::sync::Arc;

use prodone_core::dihedral::{self, DihedralGround};
use prodone_core::monoid::{
    catenary_degree, davenport, enumerate_atoms, factorizations, length_invariants, root_closure_probe,
    seminormality_probe, InvariantOptions, ProbeResult,
};
use prodone_core::sequence::parse_with_support;
use prodone_core::verify::{run_suite, Suite};
use prodone_core::{
    product_one_ordering, product_set_dp, product_set_perm, AtomInventory, AtomMode, Budgets, Element, Error,
    GroundSet, GroupSpec, Monoid, ProductSet, Result, Sequence,
};
use serde_json::{json, Value};

use crate::report::{atom_certificate, exact, exact_within_bound, Report};
use crate::{Command, DihedralCommand, GlobalOpts, Outcome, ProbeKind, SuiteArg};

pub fn run(command: Command, opts: &GlobalOpts) -> Result<Outcome> {
    let budgets = opts.budgets();
    match command {
        Command::Pi {
            group,
            sequence,
            oracle,
        } => pi(&group, &sequence, oracle, &budgets).map(Outcome::from),
        Command::IsOne {
            group,
            sequence,
            witness,
        } => is_one(&group, &sequence, witness, &budgets).map(Outcome::from),
        Command::Atoms {
            group,
            subset,
            max_len,
            exact: _,
        } => atoms(&group, &subset, max_len, &budgets).map(Outcome::from),
        Command::Davenport { group, subset, max_len } => {
            davenport_cmd(&group, &subset, max_len, &budgets).map(Outcome::from)
        }
        Command::Factorize {
            group,
            subset,
            sequence,
        } => factorize(&group, &subset, &sequence, &budgets).map(Outcome::from),
        Command::Invariants {
            group,
            subset,
            max_size,
            max_k,
            tame_bound,
        } => invariants(&group, &subset, max_size, max_k, tame_bound, &budgets).map(Outcome::from),
        Command::Probe {
            property,
            group,
            subset,
            bound,
            max_power,
        } => probe(property, &group, &subset, bound, max_power, &budgets).map(Outcome::from),
        Command::Dihedral(sub) => dihedral_cmd(sub, &budgets).map(Outcome::from),
        Command::Verify { suite } => Ok(verify(suite, opts.timing)),
    }
}

/// A group document given as a file path or as inline JSON.
fn load_group(arg: &str) -> Result<Arc<GroupSpec>> {
    let text = if Path::new(arg).is_file() {
        std::fs::read_to_string(arg).map_err(|e| Error::Parse(format!("reading {arg}: {e}")))?
    } else {
        arg.to_string()
    };
    GroupSpec::parse(&text).map(Arc::new)
}

fn load_subset(group: &str, subset: &str) -> Result<GroundSet> {
    GroundSet::parse(load_group(group)?, subset)
}

fn element_names(group: &GroupSpec, elements: &[Element]) -> Vec<String> {
    elements.iter().map(|&e| group.format_element(e)).collect()
}

fn product_set_names(group: &GroupSpec, set: &ProductSet) -> Vec<String> {
    element_names(group, set.elements())
}

fn atom_names(inv: &AtomInventory) -> Vec<String> {
    inv.atoms().iter().map(|a| inv.ground().format_sequence(a)).collect()
}

/// A provably complete inventory when one is cheap, else every atom up to `len`.
fn inventory_covering(monoid: &Monoid, len: u32) -> Result<AtomInventory> {
    let ground = monoid.ground();
    if ground.group().is_finite() {
        match enumerate_atoms(monoid, AtomMode::Exact) {
            Ok(inv) => return Ok(inv),
            Err(e) if e.is_budget() => {}
            Err(e) => return Err(e),
        }
    } else if ground.group().is_infinite_dihedral() {
        if let Some(inv) = dihedral::closed_form_atoms(ground)? {
            return Ok(inv);
        }
    }
    enumerate_atoms(monoid, AtomMode::MaxLen(len))
}

fn pi(group: &str, sequence: &str, oracle: bool, budgets: &Budgets) -> Result<Report> {
    let g = load_group(group)?;
    let (ground, seq) = parse_with_support(Arc::clone(&g), sequence)?;
    let dp = product_set_dp(&ground, &seq, budgets)?;
    let mut results = json!({
        "certificate": exact(),
        "contains_identity": dp.contains(g.identity()),
        "product_set": product_set_names(&g, &dp),
    });
    if oracle {
        let perm = product_set_perm(&ground, &seq, budgets)?;
        results["product_set"] = json!(product_set_names(&g, &perm));
        results["contains_identity"] = json!(perm.contains(g.identity()));
        results["oracle"] = json!({ "method": "permutation", "agrees_with_dp": perm == dp });
    }
    Ok(Report::new("pi", Some(&g))
        .input("sequence", ground.format_sequence(&seq))
        .input("oracle", oracle)
        .results(results))
}

fn is_one(group: &str, sequence: &str, witness: bool, budgets: &Budgets) -> Result<Report> {
    let g = load_group(group)?;
    let (ground, seq) = parse_with_support(Arc::clone(&g), sequence)?;
    let product_one = prodone_core::is_product_one(&ground, &seq, budgets)?;
    let mut results = json!({ "certificate": exact(), "product_one": product_one });
    if witness {
        let ordering = if product_one {
            product_one_ordering(&ground, &seq, budgets)?
        } else {
            None
        };
        results["ordering"] = json!(ordering.map(|w| element_names(&g, &w)));
    }
    Ok(Report::new("is-one", Some(&g))
        .input("sequence", ground.format_sequence(&seq))
        .input("witness", witness)
        .results(results))
}

fn atoms(group: &str, subset: &str, max_len: Option<u32>, budgets: &Budgets) -> Result<Report> {
    let ground = load_subset(group, subset)?;
    let monoid = Monoid::new(ground.clone(), *budgets);
    let mode = match max_len {
        Some(l) => AtomMode::MaxLen(l),
        None => AtomMode::Exact,
    };
    let inv = enumerate_atoms(&monoid, mode)?;
    Ok(Report::new("atoms", Some(ground.group()))
        .input("subset", ground.format_subset())
        .input("max_len", json!(max_len))
        .results(inventory_results(&inv)))
}

fn inventory_results(inv: &AtomInventory) -> Value {
    json!({
        "atoms": atom_names(inv),
        "certificate": atom_certificate(inv.certificate()),
        "count": inv.atoms().len(),
        "longest": inv.max_len(),
    })
}

fn davenport_cmd(group: &str, subset: &str, max_len: u32, budgets: &Budgets) -> Result<Report> {
    let ground = load_subset(group, subset)?;
    let monoid = Monoid::new(ground.clone(), *budgets);
    let d = davenport(&monoid, max_len)?;
    Ok(Report::new("davenport", Some(ground.group()))
        .input("subset", ground.format_subset())
        .input("max_len", max_len)
        .results(json!({ "davenport": d })))
}

fn factorize(group: &str, subset: &str, sequence: &str, budgets: &Budgets) -> Result<Report> {
    let ground = load_subset(group, subset)?;
    let seq = ground.parse_sequence(sequence)?;
    let monoid = Monoid::new(ground.clone(), *budgets);
    let len = u32::try_from(seq.len()).map_err(|_| Error::Overflow("sequence length"))?;
    let inv = inventory_covering(&monoid, len)?;
    let z = factorizations(&monoid, &seq, &inv)?;
    let listed: Vec<Vec<String>> = z
        .factorizations
        .iter()
        .map(|f| f.iter().map(|&i| ground.format_sequence(&inv.atoms()[i])).collect())
        .collect();
    Ok(Report::new("factorize", Some(ground.group()))
        .input("subset", ground.format_subset())
        .input("sequence", ground.format_sequence(&seq))
        .results(json!({
            "atom_certificate": atom_certificate(inv.certificate()),
            "catenary_degree": catenary_degree(&z),
            "certificate": exact(),
            "factorizations": listed,
            "lengths": z.lengths,
        })))
}

fn invariants(
    group: &str,
    subset: &str,
    max_size: u32,
    max_k: u32,
    tame_bound: Option<u32>,
    budgets: &Budgets,
) -> Result<Report> {
    let ground = load_subset(group, subset)?;
    let monoid = Monoid::new(ground.clone(), *budgets);
    let inv = inventory_covering(&monoid, max_size.max(tame_bound.unwrap_or(0)))?;
    let report = length_invariants(
        &monoid,
        &inv,
        InvariantOptions {
            bound: max_size,
            max_k,
            catenary_bound: max_size,
            tame_bound,
        },
    )?;
    let mut results = serde_json::to_value(&report).map_err(|e| Error::Parse(e.to_string()))?;
    results["certificate"] = exact_within_bound(max_size);
    results["atom_certificate"] = atom_certificate(inv.certificate());
    Ok(Report::new("invariants", Some(ground.group()))
        .input("subset", ground.format_subset())
        .input("max_size", max_size)
        .input("max_k", max_k)
        .input("tame_bound", json!(tame_bound))
        .results(results))
}

fn probe(
    property: ProbeKind,
    group: &str,
    subset: &str,
    bound: u32,
    max_power: u32,
    budgets: &Budgets,
) -> Result<Report> {
    let ground = load_subset(group, subset)?;
    let monoid = Monoid::new(ground.clone(), *budgets);
    let (name, outcome) = match property {
        ProbeKind::Seminormal => ("seminormal", seminormality_probe(&monoid, bound)?),
        ProbeKind::Rootclosed => ("rootclosed", root_closure_probe(&monoid, bound, max_power)?),
    };
    let fmt = |s: &Sequence| ground.format_sequence(s);
    let results = match outcome {
        ProbeResult::NoCounterexample {
            bound,
            quotients_checked,
        } => json!({
            "certificate": exact_within_bound(bound),
            "counterexample": null,
            "quotients_checked": quotients_checked,
        }),
        ProbeResult::Counterexample {
            t,
            s1,
            s2,
            powers,
            bound,
            quotients_checked,
            counterexamples_found,
        } => json!({
            "certificate": exact(),
            "counterexample": {
                "powers_product_one": powers,
                "quotient": fmt(&t),
                "numerator": fmt(&s1),
                "denominator": fmt(&s2),
            },
            "counterexamples_found": counterexamples_found,
            "quotients_checked": quotients_checked,
            "search_bound": bound,
        }),
    };
    let mut report = Report::new("probe", Some(ground.group()))
        .input("property", name)
        .input("subset", ground.format_subset())
        .input("bound", bound);
    if let ProbeKind::Rootclosed = property {
        report = report.input("max_power", max_power);
    }
    Ok(report.results(results))
}

fn dihedral_cmd(command: DihedralCommand, budgets: &Budgets) -> Result<Report> {
    let g = Arc::new(GroupSpec::infinite_dihedral());
    match command {
        DihedralCommand::Classify { subset } => {
            let ground = GroundSet::parse(Arc::clone(&g), &subset)?;
            let c = dihedral::classify(&ground)?;
            Ok(Report::new("dihedral classify", None)
                .input("subset", ground.format_subset())
                .results(json!({
                    "certificate": exact(),
                    "certificates": {
                        "elasticity_family": c.elasticity_family,
                        "long_atom_family": c.long_atom_family,
                        "weakly_krull": c.weakly_krull_certificate,
                    },
                    "finitely_generated": c.finitely_generated,
                    "locally_tame": c.locally_tame,
                    "tame": c.tame,
                    "weakly_krull": c.weakly_krull,
                })))
        }
        DihedralCommand::IsOne { sequence, witness } => {
            let (ground, seq) = parse_with_support(Arc::clone(&g), &sequence)?;
            let product_one = dihedral::is_product_one_dihedral(&ground, &seq, budgets)?;
            let mut results = json!({ "certificate": exact(), "product_one": product_one });
            if witness {
                let split = if product_one {
                    dihedral::decompose(&ground, &seq, budgets)?
                } else {
                    None
                };
                results["witness"] = match split {
                    None => Value::Null,
                    Some(w) => json!({
                        "ordering": element_names(&g, &w.ordering(&ground)),
                        "reflections_first": ground.format_sequence(&w.w1),
                        "reflections_second": ground.format_sequence(&w.w2),
                        "rotations_first": ground.format_sequence(&w.t1),
                        "rotations_second": ground.format_sequence(&w.t2),
                        "verified": w.verify(&ground),
                    }),
                };
            }
            Ok(Report::new("dihedral is-one", None)
                .input("sequence", ground.format_sequence(&seq))
                .input("witness", witness)
                .results(results))
        }
        DihedralCommand::Atoms {
            subset,
            max_len,
            closed_form,
        } => {
            let ground = GroundSet::parse(Arc::clone(&g), &subset)?;
            let inv = if closed_form {
                closed_form_inventory(&ground, max_len)?
            } else {
                enumerate_atoms(&Monoid::new(ground.clone(), *budgets), AtomMode::MaxLen(max_len))?
            };
            Ok(Report::new("dihedral atoms", None)
                .input("subset", ground.format_subset())
                .input("max_len", max_len)
                .input("closed_form", closed_form)
                .results(inventory_results(&inv)))
        }
    }
}

/// The reflection-only closed forms, or the `{a, t}` family cut at `max_len`.
fn closed_form_inventory(ground: &GroundSet, max_len: u32) -> Result<AtomInventory> {
    if let Some(inv) = dihedral::closed_form_atoms(ground)? {
        return Ok(inv);
    }
    let dg = DihedralGround::from_ground(ground)?;
    if dg.rotations == [1] && dg.reflections == [0] && !dg.has_identity {
        let inv = dihedral::generator_pair_atoms(max_len)?;
        let atoms = inv
            .atoms()
            .iter()
            .map(|a| ground.embed(inv.ground(), a))
            .collect::<Result<Vec<_>>>()?;
        return Ok(AtomInventory::new(ground.clone(), atoms, inv.certificate().clone()));
    }
    Err(Error::Unsupported(format!(
        "no closed form for the atoms over {{{}}}",
        ground.format_subset()
    )))
}

fn verify(suite: SuiteArg, timing: bool) -> Outcome {
    let suite = match suite {
        SuiteArg::All => Suite::All,
        SuiteArg::Davenport => Suite::Davenport,
        SuiteArg::Dihedral => Suite::Dihedral,
        SuiteArg::Invariants => Suite::Invariants,
        SuiteArg::Oracle => Suite::Oracle,
    };
    let reports = run_suite(suite);
    let passed = reports.iter().all(|r| r.passed);
    let criteria: Vec<Value> = reports
        .iter()
        .map(|r| {
            let mut v = json!({
                "id": r.id,
                "title": r.title,
                "status": if r.passed { "pass" } else { "fail" },
                "measured": r.measured,
                "failures": r.failures,
                "limit_ms": r.limit_ms,
            });
            if timing {
                v["elapsed_ms"] = json!(r.elapsed_ms);
            }
            v
        })
        .collect();
    let report = Report::new("verify", None)
        .input("suite", format!("{suite:?}").to_lowercase())
        .results(json!({
            "certificate": exact(),
            "criteria": criteria,
            "passed": passed,
        }));
    Outcome {
        report,
        verified: passed,
    }
}
