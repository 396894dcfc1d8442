//! SMILES emission from a total atom ordering.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write;

use super::element;
use super::molecule::{implicit_hydrogens, BondOrder, Molecule};

fn bond_symbol(m: &Molecule, k: usize) -> &'static str {
    let b = &m.bonds()[k];
    match b.order {
        BondOrder::Single if m.atom(b.a).aromatic && m.atom(b.b).aromatic => "-",
        BondOrder::Single | BondOrder::Aromatic => "",
        BondOrder::Double => "=",
        BondOrder::Triple => "#",
    }
}

fn write_atom(m: &Molecule, i: usize, out: &mut String) {
    let atom = m.atom(i);
    let h = m.hydrogens(i);
    let organic = atom.formal_charge == 0
        && atom.isotope.is_none()
        && if atom.aromatic {
            element::is_organic_aromatic(atom.atomic_number)
        } else {
            element::is_organic_subset(atom.atomic_number)
        }
        && {
            let mut probe = atom.clone();
            probe.explicit_h = None;
            implicit_hydrogens(&probe, m.neighbors(i).iter().map(|&(_, k)| m.bonds()[k].order)) == h
        };
    let sym = element::symbol(atom.atomic_number);
    let push_sym = |out: &mut String| {
        if atom.aromatic {
            for c in sym.chars() {
                out.push(c.to_ascii_lowercase());
            }
        } else {
            out.push_str(sym);
        }
    };
    if organic {
        push_sym(out);
        return;
    }
    out.push('[');
    if let Some(iso) = atom.isotope {
        let _ = write!(out, "{iso}");
    }
    push_sym(out);
    match h {
        0 => {}
        1 => out.push('H'),
        n => {
            let _ = write!(out, "H{n}");
        }
    }
    match atom.formal_charge {
        0 => {}
        1 => out.push('+'),
        -1 => out.push('-'),
        c if c > 0 => {
            let _ = write!(out, "+{c}");
        }
        c => {
            let _ = write!(out, "-{}", -c);
        }
    }
    out.push(']');
}

fn ring_label(d: u16, out: &mut String) {
    if d < 10 {
        let _ = write!(out, "{d}");
    } else {
        let _ = write!(out, "%{d:02}");
    }
}

struct Plan {
    children: Vec<Vec<(usize, usize)>>,
    // (partner, bond) pairs, partner visited later
    opens: Vec<Vec<(usize, usize)>>,
    // (partner, bond) pairs, partner visited earlier
    closes: Vec<Vec<(usize, usize)>>,
}

/// Writes the connected component containing all atoms of `m`, starting at
/// the lowest-ranked atom and visiting neighbors in rank order. `rank` must
/// be a total order.
pub(crate) fn write_connected(m: &Molecule, rank: &[u32]) -> String {
    let n = m.atom_count();
    if n == 0 {
        return String::new();
    }
    let start = (0..n).min_by_key(|&i| rank[i]).unwrap();
    let mut plan = Plan {
        children: vec![Vec::new(); n],
        opens: vec![Vec::new(); n],
        closes: vec![Vec::new(); n],
    };
    let mut visited = vec![false; n];
    let mut classified = vec![false; m.bond_count()];
    let sorted_nbrs: Vec<Vec<(usize, usize)>> = (0..n)
        .map(|i| {
            let mut v = m.neighbors(i).to_vec();
            v.sort_by_key(|&(nb, _)| rank[nb]);
            v
        })
        .collect();

    // iterative DFS: (atom, next neighbor position)
    let mut stack = vec![(start, 0usize)];
    visited[start] = true;
    while let Some(top) = stack.len().checked_sub(1) {
        let (v, pos) = stack[top];
        if pos == sorted_nbrs[v].len() {
            stack.pop();
            continue;
        }
        stack[top].1 += 1;
        let (w, k) = sorted_nbrs[v][pos];
        if classified[k] {
            continue;
        }
        classified[k] = true;
        if visited[w] {
            plan.opens[w].push((v, k));
            plan.closes[v].push((w, k));
        } else {
            visited[w] = true;
            plan.children[v].push((w, k));
            stack.push((w, 0));
        }
    }

    let mut out = String::new();
    let mut digit_of_bond = vec![0u16; m.bond_count()];
    let mut in_use: Vec<bool> = vec![false; 100];
    emit(m, start, &plan, rank, &mut digit_of_bond, &mut in_use, &mut out);
    out
}

fn emit(
    m: &Molecule,
    start: usize,
    plan: &Plan,
    rank: &[u32],
    digit_of_bond: &mut [u16],
    in_use: &mut [bool],
    out: &mut String,
) {
    enum Step {
        Atom(usize),
        Text(&'static str),
    }
    let mut work = vec![Step::Atom(start)];
    while let Some(step) = work.pop() {
        let v = match step {
            Step::Text(t) => {
                out.push_str(t);
                continue;
            }
            Step::Atom(v) => v,
        };
        write_atom(m, v, out);

        let mut freed = Vec::new();
        let mut closes = plan.closes[v].clone();
        closes.sort_by_key(|&(p, _)| rank[p]);
        for (_, k) in closes {
            let d = digit_of_bond[k];
            ring_label(d, out);
            freed.push(d);
        }
        let mut opens = plan.opens[v].clone();
        opens.sort_by_key(|&(p, _)| rank[p]);
        for (_, k) in opens {
            let d = (1..100u16)
                .find(|&d| !in_use[usize::from(d)])
                .expect("fewer than 100 open rings");
            in_use[usize::from(d)] = true;
            digit_of_bond[k] = d;
            out.push_str(bond_symbol(m, k));
            ring_label(d, out);
        }
        for d in freed {
            in_use[usize::from(d)] = false;
        }

        // push children in reverse so the first is emitted first
        let kids = &plan.children[v];
        for (idx, &(w, k)) in kids.iter().enumerate().rev() {
            let last = idx + 1 == kids.len();
            if !last {
                work.push(Step::Text(")"));
            }
            work.push(Step::Atom(w));
            work.push(Step::Text(bond_symbol(m, k)));
            if !last {
                work.push(Step::Text("("));
            }
        }
    }
}
