//! Additive ensembles of decision trees with categorical splits.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::circuit::{Builder, Circuit, FlagState, InputTable, PropertyFlags, ScopeSet, VarId, Variable};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub variables: Vec<Variable>,
    pub trees: Vec<Tree>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub weight: f64,
    pub root: Node,
}

/// A leaf value, or a split with one child per value of `var`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Node {
    Leaf { leaf: f64 },
    Split { var: VarId, children: Vec<Node> },
}

impl Forest {
    pub fn from_json(text: &str) -> Result<Forest> {
        let f: Forest = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            col: e.column(),
            msg: e.to_string(),
        })?;
        f.validate()?;
        Ok(f)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Forest> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Variables sorted by id; assignments are aligned with this order.
    pub fn vars(&self) -> Vec<Variable> {
        let mut v = self.variables.clone();
        v.sort_by_key(|v| v.id);
        v
    }

    pub fn validate(&self) -> Result<()> {
        if self.trees.is_empty() {
            return Err(Error::InvalidArgument("forest has no trees".into()));
        }
        if self.variables.is_empty() {
            return Err(Error::InvalidArgument("forest declares no variables".into()));
        }
        let mut cards = HashMap::new();
        for v in &self.variables {
            Variable::new(v.id, v.card)?;
            if cards.insert(v.id, v.card).is_some() {
                return Err(Error::InvalidArgument(format!("variable {} declared twice", v.id)));
            }
        }
        for (t, tree) in self.trees.iter().enumerate() {
            if !tree.weight.is_finite() {
                return Err(Error::InvalidArgument(format!("tree {t} has a non-finite weight")));
            }
            check_node(&tree.root, &cards, ScopeSet::EMPTY, t)?;
        }
        Ok(())
    }

    /// Tree-walk value at `x`, aligned with [`Forest::vars`].
    pub fn evaluate(&self, x: &[usize]) -> Result<f64> {
        let vars = self.vars();
        if x.len() != vars.len() {
            return Err(Error::InvalidAssignment(format!("expected {} values, got {}", vars.len(), x.len())));
        }
        let pos: HashMap<VarId, usize> = vars.iter().enumerate().map(|(i, v)| (v.id, i)).collect();
        let mut total = 0.0;
        for tree in &self.trees {
            let mut n = &tree.root;
            loop {
                match n {
                    Node::Leaf { leaf } => {
                        total += tree.weight * leaf;
                        break;
                    }
                    Node::Split { var, children } => {
                        let xi = x[pos[var]];
                        n = children.get(xi).ok_or_else(|| {
                            Error::InvalidAssignment(format!("X{var} = {xi} outside 0..{}", children.len()))
                        })?;
                    }
                }
            }
        }
        Ok(total)
    }
}

fn check_node(n: &Node, cards: &HashMap<VarId, usize>, tested: ScopeSet, tree: usize) -> Result<()> {
    match n {
        Node::Leaf { leaf } if !leaf.is_finite() => {
            Err(Error::InvalidArgument(format!("tree {tree} has a non-finite leaf")))
        }
        Node::Leaf { .. } => Ok(()),
        Node::Split { var, children } => {
            let card = *cards
                .get(var)
                .ok_or_else(|| Error::InvalidArgument(format!("tree {tree} splits on undeclared X{var}")))?;
            if tested.contains(*var) {
                return Err(Error::InvalidArgument(format!("tree {tree} tests X{var} twice on one path")));
            }
            if children.len() != card {
                return Err(Error::InvalidArgument(format!(
                    "tree {tree}: split on X{var} has {} children, expected {card}",
                    children.len()
                )));
            }
            let t = tested.union(ScopeSet::single(*var));
            children.iter().try_for_each(|c| check_node(c, cards, t, tree))
        }
    }
}

/// Single sum over one fully factorized product per root-to-leaf path.
pub fn forest_to_circuit(f: &Forest) -> Result<Circuit> {
    f.validate()?;
    let vars = f.vars();
    let mut b = Builder::new(vars.clone())?;
    let mut ind: HashMap<(VarId, usize), usize> = HashMap::new();
    let mut ones: HashMap<VarId, usize> = HashMap::new();
    let mut terms = Vec::new();
    for tree in &f.trees {
        let mut stack: Vec<(&Node, Vec<(VarId, usize)>)> = vec![(&tree.root, Vec::new())];
        while let Some((n, path)) = stack.pop() {
            match n {
                Node::Leaf { leaf } => {
                    let mut fac = Vec::with_capacity(vars.len());
                    for v in &vars {
                        let u = match path.iter().find(|(pv, _)| *pv == v.id) {
                            Some(&(_, x)) => match ind.get(&(v.id, x)) {
                                Some(&u) => u,
                                None => {
                                    let u = b.input(v.id, InputTable::indicator(v.card, x))?;
                                    ind.insert((v.id, x), u);
                                    u
                                }
                            },
                            None => match ones.get(&v.id) {
                                Some(&u) => u,
                                None => {
                                    let u = b.input(v.id, InputTable::ones(v.card))?;
                                    ones.insert(v.id, u);
                                    u
                                }
                            },
                        };
                        fac.push(u);
                    }
                    let prod = b.product_or_single(fac)?;
                    terms.push((prod, tree.weight * leaf));
                }
                Node::Split { var, children } => {
                    for (x, c) in children.iter().enumerate().rev() {
                        let mut p = path.clone();
                        p.push((*var, x));
                        stack.push((c, p));
                    }
                }
            }
        }
    }
    if terms.iter().all(|&(_, w)| w == 0.0) {
        return Circuit::zero(vars);
    }
    let root = b.sum(terms)?;
    let flags = PropertyFlags { structured: FlagState::Verified, omni: FlagState::Verified, ..Default::default() };
    b.finish(root, flags)
}
