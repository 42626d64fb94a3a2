use std::collections::BTreeMap;

use super::{BayesNet, BnError, BnNodeKind};

/// Observed node states.
pub type Evidence = BTreeMap<String, bool>;

/// Above this many unobserved roots `Auto` switches to variable elimination.
pub const ENUMERATION_MAX_ROOTS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InferenceMethod {
    #[default]
    Auto,
    Enumeration,
    VariableElimination,
}

/// Posterior `P(node = true | ev)` for every node.
pub fn infer(net: &BayesNet, ev: &Evidence) -> Result<BTreeMap<String, f64>, BnError> {
    infer_with(net, ev, InferenceMethod::Auto)
}

pub fn infer_with(net: &BayesNet, ev: &Evidence, method: InferenceMethod) -> Result<BTreeMap<String, f64>, BnError> {
    Ok(infer_distribution(net, ev, method)?
        .into_iter()
        .map(|(k, [t, _])| (k, t))
        .collect())
}

/// Posterior `[P(true), P(false)]` per node, each normalized independently.
pub fn infer_distribution(
    net: &BayesNet,
    ev: &Evidence,
    method: InferenceMethod,
) -> Result<BTreeMap<String, [f64; 2]>, BnError> {
    let observed = observed(net, ev)?;
    let method = match method {
        InferenceMethod::Auto => {
            let free = net
                .nodes
                .iter()
                .zip(&observed)
                .filter(|(n, o)| n.kind == BnNodeKind::FactRoot && o.is_none())
                .count();
            if free <= ENUMERATION_MAX_ROOTS {
                InferenceMethod::Enumeration
            } else {
                InferenceMethod::VariableElimination
            }
        }
        m => m,
    };
    let sums = match method {
        InferenceMethod::VariableElimination => eliminate_all(net, &observed)?,
        _ => enumerate(net, &observed)?,
    };
    Ok(net.nodes.iter().map(|n| n.id.clone()).zip(sums).collect())
}

fn observed(net: &BayesNet, ev: &Evidence) -> Result<Vec<Option<bool>>, BnError> {
    let mut out = vec![None; net.nodes.len()];
    for (id, &v) in ev {
        let i = net.index_of(id).ok_or_else(|| BnError::UnknownNode(id.clone()))?;
        out[i] = Some(v);
    }
    Ok(out)
}

fn parent_indices(net: &BayesNet) -> Vec<Vec<usize>> {
    net.nodes
        .iter()
        .map(|n| n.parents.iter().map(|p| net.index_of(p).expect("validated parent")).collect())
        .collect()
}

fn row_of(parents: &[usize], values: &[bool]) -> usize {
    parents.iter().fold(0, |acc, &p| (acc << 1) | values[p] as usize)
}

/// Depth-first sum over the joint in topological order. Deterministic CPT
/// rows fix a node's value without branching and zero-weight branches are
/// cut, so only unobserved stochastic nodes multiply the work.
fn enumerate(net: &BayesNet, observed: &[Option<bool>]) -> Result<Vec<[f64; 2]>, BnError> {
    let parents = parent_indices(net);
    let n = net.nodes.len();
    let mut acc = vec![[0.0f64; 2]; n];
    let mut total = 0.0;
    let mut values = vec![false; n];

    struct Ctx<'a> {
        net: &'a BayesNet,
        parents: &'a [Vec<usize>],
        observed: &'a [Option<bool>],
    }

    fn go(ctx: &Ctx, i: usize, weight: f64, values: &mut Vec<bool>, acc: &mut [[f64; 2]], total: &mut f64) {
        if weight == 0.0 {
            return;
        }
        if i == values.len() {
            *total += weight;
            for (k, v) in values.iter().enumerate() {
                acc[k][if *v { 0 } else { 1 }] += weight;
            }
            return;
        }
        let row = row_of(&ctx.parents[i], values);
        let [pt, pf] = ctx.net.nodes[i].cpt[row];
        match ctx.observed[i] {
            Some(v) => {
                values[i] = v;
                go(ctx, i + 1, weight * if v { pt } else { pf }, values, acc, total);
            }
            None if pf == 0.0 => {
                values[i] = true;
                go(ctx, i + 1, weight * pt, values, acc, total);
            }
            None if pt == 0.0 => {
                values[i] = false;
                go(ctx, i + 1, weight * pf, values, acc, total);
            }
            None => {
                values[i] = true;
                go(ctx, i + 1, weight * pt, values, acc, total);
                values[i] = false;
                go(ctx, i + 1, weight * pf, values, acc, total);
            }
        }
    }

    let ctx = Ctx {
        net,
        parents: &parents,
        observed,
    };
    go(&ctx, 0, 1.0, &mut values, &mut acc, &mut total);
    if total <= 0.0 {
        return Err(BnError::ImpossibleEvidence);
    }
    Ok(acc.into_iter().map(|[t, f]| [t / total, f / total]).collect())
}

/// Table over binary variables; index bits follow `vars`, first most
/// significant, bit set = true.
#[derive(Debug, Clone)]
struct Factor {
    vars: Vec<usize>,
    table: Vec<f64>,
}

impl Factor {
    fn value_at(&self, assignment: &[(usize, bool)]) -> f64 {
        let idx = self.vars.iter().fold(0, |acc, v| {
            let bit = assignment.iter().find(|(a, _)| a == v).map(|(_, b)| *b).unwrap_or(false);
            (acc << 1) | bit as usize
        });
        self.table[idx]
    }

    fn product(&self, other: &Factor) -> Factor {
        let mut vars = self.vars.clone();
        for v in &other.vars {
            if !vars.contains(v) {
                vars.push(*v);
            }
        }
        let k = vars.len();
        let table = (0..1usize << k)
            .map(|idx| {
                let asg: Vec<(usize, bool)> = vars
                    .iter()
                    .enumerate()
                    .map(|(j, v)| (*v, (idx >> (k - 1 - j)) & 1 == 1))
                    .collect();
                self.value_at(&asg) * other.value_at(&asg)
            })
            .collect();
        Factor { vars, table }
    }

    fn sum_out(&self, var: usize) -> Factor {
        let pos = self.vars.iter().position(|v| *v == var).expect("var in factor");
        let k = self.vars.len();
        let vars: Vec<usize> = self.vars.iter().copied().filter(|v| *v != var).collect();
        let shift = k - 1 - pos;
        let table = (0..1usize << (k - 1))
            .map(|idx| {
                // re-insert the summed bit at `shift`
                let high = (idx >> shift) << (shift + 1);
                let low = idx & ((1 << shift) - 1);
                self.table[high | low] + self.table[high | (1 << shift) | low]
            })
            .collect();
        Factor { vars, table }
    }

    fn restrict(&self, var: usize, value: bool) -> Factor {
        let Some(pos) = self.vars.iter().position(|v| *v == var) else {
            return self.clone();
        };
        let k = self.vars.len();
        let vars: Vec<usize> = self.vars.iter().copied().filter(|v| *v != var).collect();
        let shift = k - 1 - pos;
        let table = (0..1usize << (k - 1))
            .map(|idx| {
                let high = (idx >> shift) << (shift + 1);
                let low = idx & ((1 << shift) - 1);
                self.table[high | ((value as usize) << shift) | low]
            })
            .collect();
        Factor { vars, table }
    }
}

fn node_factors(net: &BayesNet) -> Vec<Factor> {
    let parents = parent_indices(net);
    net.nodes
        .iter()
        .enumerate()
        .map(|(i, n)| {
            let mut vars = parents[i].clone();
            vars.push(i);
            let k = parents[i].len();
            let table = (0..1usize << (k + 1))
                .map(|idx| {
                    let row = idx >> 1;
                    if idx & 1 == 1 {
                        n.cpt[row][0]
                    } else {
                        n.cpt[row][1]
                    }
                })
                .collect();
            Factor { vars, table }
        })
        .collect()
}

/// Sums out every unobserved variable except `query`, choosing at each step
/// the variable with the fewest neighbours (lowest index on ties).
fn eliminate(mut factors: Vec<Factor>, query: Option<usize>, hidden: &[usize]) -> Factor {
    let mut remaining: Vec<usize> = hidden.iter().copied().filter(|v| Some(*v) != query).collect();
    while !remaining.is_empty() {
        let degree = |v: usize| {
            let mut nb: Vec<usize> = factors
                .iter()
                .filter(|f| f.vars.contains(&v))
                .flat_map(|f| f.vars.iter().copied())
                .filter(|u| *u != v)
                .collect();
            nb.sort_unstable();
            nb.dedup();
            nb.len()
        };
        let (pos, &var) = remaining
            .iter()
            .enumerate()
            .min_by_key(|(_, v)| (degree(**v), **v))
            .unwrap();
        remaining.remove(pos);
        let (touching, rest): (Vec<Factor>, Vec<Factor>) = factors.into_iter().partition(|f| f.vars.contains(&var));
        factors = rest;
        if let Some(prod) = touching.into_iter().reduce(|a, b| a.product(&b)) {
            factors.push(prod.sum_out(var));
        }
    }
    factors
        .into_iter()
        .reduce(|a, b| a.product(&b))
        .unwrap_or(Factor { vars: Vec::new(), table: vec![1.0] })
}

fn eliminate_all(net: &BayesNet, observed: &[Option<bool>]) -> Result<Vec<[f64; 2]>, BnError> {
    let mut factors = node_factors(net);
    for (v, o) in observed.iter().enumerate() {
        if let Some(value) = o {
            factors = factors.iter().map(|f| f.restrict(v, *value)).collect();
        }
    }
    let hidden: Vec<usize> = (0..net.nodes.len()).filter(|v| observed[*v].is_none()).collect();
    let evidence_mass = eliminate(factors.clone(), None, &hidden).table[0];
    if evidence_mass <= 0.0 {
        return Err(BnError::ImpossibleEvidence);
    }
    Ok((0..net.nodes.len())
        .map(|i| match observed[i] {
            Some(true) => [1.0, 0.0],
            Some(false) => [0.0, 1.0],
            None => {
                let f = eliminate(factors.clone(), Some(i), &hidden);
                debug_assert_eq!(f.vars, [i]);
                [f.table[1] / evidence_mass, f.table[0] / evidence_mass]
            }
        })
        .collect())
}
