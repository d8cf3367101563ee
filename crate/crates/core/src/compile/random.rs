//! Seeded random circuits over a scope-partition tree.

use std::collections::HashMap;
use std::hash::{Hash, Hasher};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::{Builder, Circuit, FlagState, InputTable, PropertyFlags, ScopeSet, VarId, Variable};
use crate::error::{Error, Result};

/// Binary scope-partition tree (vtree) over a set of variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Vtree {
    Leaf(VarId),
    Split(Box<Vtree>, Box<Vtree>),
}

impl Vtree {
    /// Random vtree: shuffles the variables and splits at random points.
    pub fn random(vars: &[VarId], rng: &mut impl Rng) -> Result<Vtree> {
        if vars.is_empty() {
            return Err(Error::InvalidArgument("vtree needs at least one variable".into()));
        }
        let mut v = vars.to_vec();
        v.shuffle(rng);
        Ok(Self::build(&v, rng))
    }

    fn build(v: &[VarId], rng: &mut impl Rng) -> Vtree {
        if v.len() == 1 {
            return Vtree::Leaf(v[0]);
        }
        let cut = rng.gen_range(1..v.len());
        Vtree::Split(Box::new(Self::build(&v[..cut], rng)), Box::new(Self::build(&v[cut..], rng)))
    }

    /// Vtree whose root separates `left` from `right`.
    pub fn join(left: Vtree, right: Vtree) -> Vtree {
        Vtree::Split(Box::new(left), Box::new(right))
    }

    pub fn scope(&self) -> ScopeSet {
        match self {
            Vtree::Leaf(v) => ScopeSet::single(*v),
            Vtree::Split(l, r) => l.scope().union(r.scope()),
        }
    }

    /// Every internal node's split as a pair of scopes.
    pub fn splits(&self) -> Vec<(ScopeSet, ScopeSet)> {
        let mut out = Vec::new();
        self.collect(&mut out);
        out
    }

    fn collect(&self, out: &mut Vec<(ScopeSet, ScopeSet)>) {
        if let Vtree::Split(l, r) = self {
            out.push((l.scope(), r.scope()));
            l.collect(out);
            r.collect(out);
        }
    }

    fn find(&self, scope: ScopeSet) -> Option<&Vtree> {
        if self.scope() == scope {
            return Some(self);
        }
        match self {
            Vtree::Leaf(_) => None,
            Vtree::Split(l, r) => {
                if scope.is_subset(l.scope()) {
                    l.find(scope)
                } else {
                    r.find(scope)
                }
            }
        }
    }

    /// Identifier shared by all circuits generated over this vtree.
    pub fn class_id(&self) -> u64 {
        let mut h = std::collections::hash_map::DefaultHasher::new();
        self.hash(&mut h);
        h.finish()
    }
}

/// Generator settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenSpec {
    pub card: usize,
    pub structured: bool,
    pub deterministic: bool,
    /// Children per sum unit in families without determinism.
    pub sum_children: usize,
    /// Distinct units generated per (scope, restriction).
    pub variants: usize,
}

impl Default for GenSpec {
    fn default() -> Self {
        GenSpec { card: 2, structured: true, deterministic: false, sum_children: 2, variants: 2 }
    }
}

impl GenSpec {
    /// Settings producing the requested flags; smoothness and decomposability always hold.
    pub fn from_flags(want: &PropertyFlags) -> Result<GenSpec> {
        if want.omni.holds() {
            return Err(Error::InvalidArgument("the generator has no omni-compatible family".into()));
        }
        Ok(GenSpec {
            structured: want.structured.holds(),
            deterministic: want.deterministic.holds(),
            ..Default::default()
        })
    }
}

/// Variable ids 1..=n with cardinality `card`.
pub fn variables(n: usize, card: usize) -> Result<Vec<Variable>> {
    (1..=n as u32).map(|i| Variable::new(i, card)).collect()
}

/// Random circuit over binary variables 1..=nvars with the requested flags.
pub fn random_circuit(seed: u64, nvars: usize, want: &PropertyFlags) -> Result<Circuit> {
    let spec = GenSpec::from_flags(want)?;
    random_with_spec(seed, nvars, &spec)
}

pub fn random_with_spec(seed: u64, nvars: usize, spec: &GenSpec) -> Result<Circuit> {
    Ok(random_with_vtree(seed, nvars, spec)?.0)
}

/// Random circuit together with the vtree it was generated from.
pub fn random_with_vtree(seed: u64, nvars: usize, spec: &GenSpec) -> Result<(Circuit, Vtree)> {
    if nvars == 0 {
        return Err(Error::InvalidArgument("random circuit needs at least one variable".into()));
    }
    let vars = variables(nvars, spec.card)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ids: Vec<VarId> = vars.iter().map(|v| v.id).collect();
    let vtree = Vtree::random(&ids, &mut rng)?;
    let c = generate(&mut rng, &vars, &vtree, spec)?;
    Ok((c, vtree))
}

/// Two circuits over the same vtree with independent parameters, hence compatible.
pub fn random_compatible_pair(seed: u64, nvars: usize, want: &PropertyFlags) -> Result<(Circuit, Circuit)> {
    let mut spec = GenSpec::from_flags(want)?;
    spec.structured = true;
    let vars = variables(nvars, spec.card)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ids: Vec<VarId> = vars.iter().map(|v| v.id).collect();
    let vtree = Vtree::random(&ids, &mut rng)?;
    let p = generate(&mut ChaCha8Rng::seed_from_u64(seed.wrapping_mul(2).wrapping_add(1)), &vars, &vtree, &spec)?;
    let q = generate(&mut ChaCha8Rng::seed_from_u64(seed.wrapping_mul(2).wrapping_add(2)), &vars, &vtree, &spec)?;
    Ok((p, q))
}

/// Circuit over `vars` following `vtree`; structured and deterministic per `spec`.
pub fn generate(rng: &mut impl Rng, vars: &[Variable], vtree: &Vtree, spec: &GenSpec) -> Result<Circuit> {
    let mut g = Gen { rng, vtree, spec: *spec, b: Builder::new(vars.to_vec())?, cache: HashMap::new() };
    let root = g.unit(vtree.scope(), None, 0)?;
    let flags = g.flags();
    g.b.finish(root, flags)
}

/// Structured deterministic circuit over X ∪ Y whose marginals over X and
/// over Y stay deterministic: the root pairs w=g in X with u=g in Y.
pub fn random_mdet(seed: u64, x: &[VarId], y: &[VarId]) -> Result<Circuit> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::InvalidArgument("both variable groups must be nonempty".into()));
    }
    let mut all: Vec<VarId> = x.iter().chain(y).copied().collect();
    all.sort_unstable();
    let vars: Vec<Variable> = all.iter().map(|&v| Variable::new(v, 2)).collect::<Result<_>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vtree = Vtree::join(Vtree::random(x, &mut rng)?, Vtree::random(y, &mut rng)?);
    let spec = GenSpec { structured: true, deterministic: true, ..Default::default() };
    let mut g = Gen { rng: &mut rng, vtree: &vtree, spec, b: Builder::new(vars)?, cache: HashMap::new() };
    let w = x[g.rng.gen_range(0..x.len())];
    let u = y[g.rng.gen_range(0..y.len())];
    let xs = ScopeSet::from_ids(x.iter().copied());
    let ys = ScopeSet::from_ids(y.iter().copied());
    let mut children = Vec::new();
    let weights = g.simplex(2);
    for (val, wt) in weights.into_iter().enumerate() {
        let l = g.unit(xs, Some((w, vec![val])), 0)?;
        let r = g.unit(ys, Some((u, vec![val])), 0)?;
        children.push((g.b.product(vec![l, r])?, wt));
    }
    let root = g.b.sum_with(children, Vec::new(), true)?;
    let flags = g.flags();
    g.b.finish(root, flags)
}

type Restriction = Option<(VarId, Vec<usize>)>;

struct Gen<'a, R: Rng> {
    rng: &'a mut R,
    vtree: &'a Vtree,
    spec: GenSpec,
    b: Builder,
    cache: HashMap<(ScopeSet, Restriction, usize), usize>,
}

impl<R: Rng> Gen<'_, R> {
    fn flags(&self) -> PropertyFlags {
        let s = &self.spec;
        PropertyFlags {
            structured: if s.structured { FlagState::Verified } else { FlagState::Unknown },
            deterministic: if s.deterministic { FlagState::Verified } else { FlagState::Unknown },
            compat_class: s.structured.then(|| self.vtree.class_id()),
            ..Default::default()
        }
    }

    fn simplex(&mut self, k: usize) -> Vec<f64> {
        let raw: Vec<f64> = (0..k).map(|_| self.rng.gen_range(0.05..1.0)).collect();
        let t: f64 = raw.iter().sum();
        raw.into_iter().map(|v| v / t).collect()
    }

    fn split(&mut self, scope: ScopeSet) -> (ScopeSet, ScopeSet) {
        if self.spec.structured {
            if let Some(Vtree::Split(l, r)) = self.vtree.find(scope) {
                return (l.scope(), r.scope());
            }
        }
        let mut ids = scope.ids();
        ids.shuffle(self.rng);
        let cut = self.rng.gen_range(1..ids.len());
        (ScopeSet::from_ids(ids[..cut].iter().copied()), ScopeSet::from_ids(ids[cut..].iter().copied()))
    }

    fn pick_variant(&mut self) -> usize {
        self.rng.gen_range(0..self.spec.variants.max(1))
    }

    fn unit(&mut self, scope: ScopeSet, restr: Restriction, variant: usize) -> Result<usize> {
        let key = (scope, restr.clone(), variant);
        if let Some(&u) = self.cache.get(&key) {
            return Ok(u);
        }
        let u = if scope.len() == 1 { self.leaf(scope.ids()[0], &restr)? } else { self.inner(scope, &restr)? };
        self.cache.insert(key, u);
        Ok(u)
    }

    fn leaf(&mut self, var: VarId, restr: &Restriction) -> Result<usize> {
        let card = self.b.card(var).unwrap();
        let allowed: Vec<bool> = match restr {
            Some((v, g)) if *v == var => (0..card).map(|x| g.contains(&x)).collect(),
            _ => vec![true; card],
        };
        let raw: Vec<f64> = allowed.iter().map(|&a| if a { self.rng.gen_range(0.05..1.0) } else { 0.0 }).collect();
        let t: f64 = raw.iter().sum();
        let values = raw.into_iter().map(|v| v / t).collect();
        self.b.input(var, InputTable::new(values, allowed)?)
    }

    fn inner(&mut self, scope: ScopeSet, restr: &Restriction) -> Result<usize> {
        if !self.spec.deterministic {
            let k = self.spec.sum_children.max(1);
            let weights = self.simplex(k);
            let mut children = Vec::with_capacity(k);
            for w in weights {
                let (a, b) = self.split(scope);
                let (va, vb) = (self.pick_variant(), self.pick_variant());
                let l = self.unit(a, None, va)?;
                let r = self.unit(b, None, vb)?;
                children.push((self.b.product(vec![l, r])?, w));
            }
            return self.b.sum(children);
        }
        let (a, b) = self.split(scope);
        // partition on a variable from the side that does not carry the incoming restriction
        let free_side = match restr {
            Some((z0, _)) if a.contains(*z0) => b,
            Some(_) => a,
            None => {
                if self.rng.gen_bool(0.5) {
                    a
                } else {
                    b
                }
            }
        };
        let ids = free_side.ids();
        let z = ids[self.rng.gen_range(0..ids.len())];
        let card = self.b.card(z).unwrap();
        let groups = self.partition_values(card);
        let weights = self.simplex(groups.len());
        let mut children = Vec::with_capacity(groups.len());
        for (g, w) in groups.into_iter().zip(weights) {
            let zr: Restriction = Some((z, g));
            let side_restr = |s: ScopeSet| -> Restriction {
                if s.contains(z) {
                    zr.clone()
                } else if restr.as_ref().is_some_and(|(z0, _)| s.contains(*z0)) {
                    restr.clone()
                } else {
                    None
                }
            };
            let (ra, rb) = (side_restr(a), side_restr(b));
            let (va, vb) = (self.pick_variant(), self.pick_variant());
            let l = self.unit(a, ra, va)?;
            let r = self.unit(b, rb, vb)?;
            children.push((self.b.product(vec![l, r])?, w));
        }
        self.b.sum_with(children, Vec::new(), true)
    }

    /// Random partition of 0..card into at least two nonempty groups.
    fn partition_values(&mut self, card: usize) -> Vec<Vec<usize>> {
        let k = self.rng.gen_range(2..=card);
        let mut vals: Vec<usize> = (0..card).collect();
        vals.shuffle(self.rng);
        let mut groups: Vec<Vec<usize>> = vec![Vec::new(); k];
        for (i, v) in vals.into_iter().enumerate() {
            let g = if i < k { i } else { self.rng.gen_range(0..k) };
            groups[g].push(v);
        }
        for g in groups.iter_mut() {
            g.sort_unstable();
        }
        groups
    }
}
