//! Helpers shared by the integration tests.
#![allow(dead_code)]

use std::path::{Path, PathBuf};

use csp_sampling::formulas::{relational_atoms, Atom, Instance};
use csp_sampling::io::{parse_theory_spec, TheorySpec};
use csp_sampling::model::Signature;
use rand::seq::SliceRandom;
use rand::Rng;

pub fn theories_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../theories")
}

pub fn load_theories(file: &str) -> TheorySpec {
    let text = std::fs::read_to_string(theories_dir().join(file)).expect("theory file");
    parse_theory_spec(&text).expect("theory file parses")
}

/// The robot scheduling theories `A`, `B` and their union `T`.
pub fn robot() -> TheorySpec {
    load_theories("robot.theory")
}

pub fn names(k: usize) -> Vec<String> {
    (0..k).map(|i| format!("v{i}")).collect()
}

/// Decides an instance over `lt`, `min3`, `p0`, `p1` in the combined theory
/// of the rationals with `min3` and a two-part partition.
///
/// In a model every element has a rank in the order and a part, and
/// distinct elements have distinct ranks. So it suffices to try every rank
/// assignment into `0..k` and check that no rank is asked to lie in both
/// parts.
pub fn robot_oracle(inst: &Instance) -> bool {
    let sig = inst.signature();
    let k = inst.num_vars();
    let mut rank = vec![0usize; k];
    loop {
        if robot_holds(sig, inst.atoms(), &rank) {
            return true;
        }
        let mut i = 0;
        loop {
            if i == k {
                return false;
            }
            rank[i] += 1;
            if rank[i] < k {
                break;
            }
            rank[i] = 0;
            i += 1;
        }
    }
}

fn robot_holds(sig: &Signature, atoms: &[Atom], rank: &[usize]) -> bool {
    let mut part = vec![0u8; rank.len().max(1)];
    for atom in atoms {
        let ok = match atom {
            Atom::Bot => false,
            Atom::Eq(a, b) => rank[*a] == rank[*b],
            Atom::Neq(a, b) => rank[*a] != rank[*b],
            Atom::Rel { symbol, args } => {
                let r: Vec<usize> = args.iter().map(|&a| rank[a]).collect();
                match sig.symbol(*symbol).name.as_str() {
                    "lt" => r[0] < r[1],
                    "min3" => r[0] == r[1].min(r[2]),
                    "p0" => {
                        part[r[0]] |= 1;
                        true
                    }
                    "p1" => {
                        part[r[0]] |= 2;
                        true
                    }
                    other => panic!("unexpected symbol {other}"),
                }
            }
        };
        if !ok {
            return false;
        }
    }
    part.iter().all(|&p| p != 3)
}

/// Every atom over `k` variables: relational atoms, equalities and
/// disequalities between distinct variables, and `false`.
pub fn all_atoms(sig: &Signature, k: usize) -> Vec<Atom> {
    let mut atoms = relational_atoms(sig, k);
    for i in 0..k {
        for j in i + 1..k {
            atoms.push(Atom::Eq(i, j));
            atoms.push(Atom::Neq(i, j));
        }
    }
    atoms.push(Atom::Bot);
    atoms
}

/// Every instance with at most `max_vars` variables and at most `max_atoms`
/// atoms. Instances over `k` variables declare all of them.
pub fn exhaustive(sig: &Signature, max_vars: usize, max_atoms: usize) -> Vec<Instance> {
    fn go(start: usize, atoms: &[Atom], max: usize, chosen: &mut Vec<Atom>, emit: &mut dyn FnMut(&[Atom])) {
        emit(chosen);
        if chosen.len() == max {
            return;
        }
        for i in start..atoms.len() {
            chosen.push(atoms[i].clone());
            go(i + 1, atoms, max, chosen, emit);
            chosen.pop();
        }
    }
    let mut out = Vec::new();
    for k in 0..=max_vars {
        let atoms = all_atoms(sig, k);
        go(0, &atoms, max_atoms, &mut Vec::new(), &mut |set| {
            out.push(Instance::from_parts(sig.clone(), names(k), set.to_vec()));
        });
    }
    out
}

/// A random instance with `1..=max_vars` variables over the whole signature,
/// with equalities and disequalities mixed in.
pub fn random_instance(rng: &mut impl Rng, sig: &Signature, max_vars: usize, with_neq: bool) -> Instance {
    let k = rng.gen_range(1..=max_vars);
    let count = rng.gen_range(1..=k + 2);
    let mut atoms = Vec::with_capacity(count);
    while atoms.len() < count {
        let roll = rng.gen_range(0..10);
        let atom = match roll {
            0 if k > 1 => {
                let (a, b) = (rng.gen_range(0..k), rng.gen_range(0..k));
                Atom::Eq(a, b)
            }
            1 if k > 1 && with_neq => {
                let (a, b) = (rng.gen_range(0..k), rng.gen_range(0..k));
                Atom::Neq(a, b)
            }
            0 | 1 => continue,
            _ => {
                let symbol = rng.gen_range(0..sig.len());
                let args = (0..sig.symbol(symbol).arity).map(|_| rng.gen_range(0..k)).collect();
                Atom::Rel { symbol, args }
            }
        };
        atoms.push(atom);
    }
    Instance::from_parts(sig.clone(), names(k), atoms)
}

/// An instance with `n` variables and `2n` atoms over `lt`, `min3`, `p0`,
/// `p1` and disequalities, built around a hidden assignment of ranks and
/// parts so that it is satisfiable; with `sat` unset an `lt`-cycle is added.
pub fn planted(rng: &mut impl Rng, sig: &Signature, n: usize, sat: bool) -> Instance {
    let vars = names(n);
    let rank: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
    let part: Vec<usize> = (0..n).map(|_| rng.gen_range(0..2)).collect();
    let mut inst = Instance::new(sig.clone());
    for v in &vars {
        inst.declare(v);
    }
    let mut m = 0;
    while m < 2 * n {
        let (x, y) = (rng.gen_range(0..n), rng.gen_range(0..n));
        match rng.gen_range(0..4) {
            0 if rank[x] < rank[y] => {
                inst.add_rel("lt", &[&vars[x], &vars[y]]).unwrap();
            }
            1 => {
                let low = rank[x].min(rank[y]);
                let at_low: Vec<usize> = (0..n).filter(|&w| rank[w] == low).collect();
                let w = *at_low.choose(rng).unwrap();
                inst.add_rel("min3", &[&vars[w], &vars[x], &vars[y]]).unwrap();
            }
            2 => {
                let p = if part[rank[x]] == 0 { "p0" } else { "p1" };
                inst.add_rel(p, &[&vars[x]]).unwrap();
            }
            3 if rank[x] != rank[y] => {
                inst.add_neq(&vars[x], &vars[y]);
            }
            _ => continue,
        }
        m += 1;
    }
    if !sat {
        let (x, y, z) = (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n));
        inst.add_rel("lt", &[&vars[x], &vars[y]]).unwrap();
        inst.add_rel("lt", &[&vars[y], &vars[z]]).unwrap();
        inst.add_rel("lt", &[&vars[z], &vars[x]]).unwrap();
    }
    inst
}
