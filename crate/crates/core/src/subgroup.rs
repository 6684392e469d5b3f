//! Finitely generated subgroups of free groups, via their Stallings
//! automata.
//!
//! A [`Subgroup`] bundles the input generators, the folded Stallings
//! automaton, the folding trace (for membership witnesses), a spanning
//! tree, and the basis it induces. Construction is the Stallings
//! procedure: build the flower automaton of the generators and fold until
//! deterministic. Every query of the classical subgroup toolbox — rank,
//! membership with witness, index and transversal, normality, conjugacy,
//! intersections, Hanna Neumann audits, coset intersection, Hall
//! completion, fixed-index enumeration — then reads off the automaton.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::automaton::{flower, ArcId, Flower, InvolutiveAutomaton, Step, VertexId};
use crate::error::{Error, Result};
use crate::folding::{
    fold_to_completion, lift_path, loss, petal_decompose, FoldingTrace, PetalWord,
};
use crate::words::{Alphabet, Letter, Word};

/// Default cap on the number of permutation tuples visited by
/// [`enumerate_index_subgroups`].
pub const DEFAULT_ENUMERATION_CAP: u64 = 10_000_000;

/// A finitely generated subgroup `H ≤ F_n`, with its computed Stallings
/// automaton and basis.
#[derive(Debug, Clone)]
pub struct Subgroup {
    alphabet: Alphabet,
    generators: Vec<Word>,
    stallings: InvolutiveAutomaton,
    flower: Flower,
    trace: FoldingTrace,
    tree: BTreeSet<ArcId>,
    basis: Vec<Word>,
}

/// Finite-index data: the index and a transversal of right cosets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexData {
    pub index: usize,
    /// Tree-geodesic coset representatives, the identity first, then in
    /// BFS order of the Stallings automaton.
    pub transversal: Vec<Word>,
}

/// Component-by-component Hanna Neumann audit of a pullback product.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShnAudit {
    /// `max(0, rank − 1)` of the cyclic core of each connected component
    /// of the full product, in ascending order of minimal vertex pair.
    pub component_reduced_ranks: Vec<usize>,
    pub sum: usize,
    /// The classical Howson-style bound `2·rrk(H)·rrk(K)`.
    pub howson_bound: usize,
    /// The Friedman–Mineyev bound `rrk(H)·rrk(K)`.
    pub strong_bound: usize,
}

impl Subgroup {
    /// Computes the Stallings automaton of `⟨generators⟩` by folding the
    /// flower automaton. Trivial (empty) generators are dropped.
    pub fn make(alphabet: Alphabet, generators: &[Word]) -> Result<Subgroup> {
        let mut gens = Vec::new();
        for g in generators {
            if g.alphabet() != alphabet {
                return Err(Error::AlphabetMismatch {
                    expected: alphabet.rank(),
                    found: g.alphabet().rank(),
                });
            }
            if !g.is_empty() {
                gens.push(g.clone());
            }
        }
        let flower = flower(alphabet, &gens)?;
        let (stallings, trace) = fold_to_completion(&flower.automaton);
        let tree = stallings.spanning_tree()?;
        let basis = basis_from_tree(&stallings, &tree)?;
        let subgroup = Subgroup {
            alphabet,
            generators: gens,
            stallings,
            flower,
            trace,
            tree,
            basis,
        };
        subgroup.debug_check();
        Ok(subgroup)
    }

    /// Wraps an already-reduced automaton (deterministic, connected, core)
    /// as a subgroup, keeping the supplied spanning tree for the basis.
    /// The generators become the computed basis, and the stored automaton
    /// is the refold of its flower (so the folding trace stays coherent
    /// for witness lifting).
    fn from_parts(
        alphabet: Alphabet,
        aut: &InvolutiveAutomaton,
        tree: &BTreeSet<ArcId>,
    ) -> Subgroup {
        let basis = basis_from_tree(aut, tree).expect("spanning tree must span the automaton");
        let flower = flower(alphabet, &basis).expect("basis words are in the alphabet");
        let (stallings, trace) = fold_to_completion(&flower.automaton);
        let phi = aut
            .isomorphic_based(&stallings)
            .expect("refolded basis must recognize the same subgroup");
        let tree = tree
            .iter()
            .map(|&id| {
                let arc = aut.arc(id).expect("tree arc must be live");
                let step = stallings
                    .steps_reading(phi[&arc.source], Letter::gen(arc.label))
                    .expect("label in range")[0];
                debug_assert_eq!(stallings.step_end(step).unwrap(), phi[&arc.target]);
                step.arc
            })
            .collect();
        let subgroup = Subgroup {
            alphabet,
            generators: basis.clone(),
            stallings,
            flower,
            trace,
            tree,
            basis,
        };
        subgroup.debug_check();
        subgroup
    }

    fn from_stallings(alphabet: Alphabet, aut: &InvolutiveAutomaton) -> Subgroup {
        let tree = aut.spanning_tree().expect("automaton must be connected");
        Subgroup::from_parts(alphabet, aut, &tree)
    }

    fn debug_check(&self) {
        #[cfg(debug_assertions)]
        {
            assert!(self.stallings.is_deterministic());
            assert_eq!(self.basis.len(), self.stallings.graph_rank().unwrap());
            let base = self.stallings.base();
            for w in self.generators.iter().chain(&self.basis) {
                assert_eq!(self.stallings.read_word(base, w).unwrap(), Some(base));
            }
        }
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    /// The (nonempty) input generators.
    pub fn generators(&self) -> &[Word] {
        &self.generators
    }

    pub fn stallings(&self) -> &InvolutiveAutomaton {
        &self.stallings
    }

    pub fn trace(&self) -> &FoldingTrace {
        &self.trace
    }

    pub fn spanning_tree(&self) -> &BTreeSet<ArcId> {
        &self.tree
    }

    /// The free basis read off the spanning tree.
    pub fn basis(&self) -> &[Word] {
        &self.basis
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// Reduced rank `max(0, rank − 1)`.
    pub fn reduced_rank(&self) -> usize {
        self.rank().saturating_sub(1)
    }

    pub fn is_trivial(&self) -> bool {
        self.basis.is_empty()
    }

    fn check_word(&self, w: &Word) -> Result<()> {
        if w.alphabet() == self.alphabet {
            Ok(())
        } else {
            Err(Error::AlphabetMismatch {
                expected: self.alphabet.rank(),
                found: w.alphabet().rank(),
            })
        }
    }

    fn check_subgroup(&self, other: &Subgroup) -> Result<()> {
        if other.alphabet == self.alphabet {
            Ok(())
        } else {
            Err(Error::AlphabetMismatch {
                expected: self.alphabet.rank(),
                found: other.alphabet.rank(),
            })
        }
    }

    /// Membership: does reading `w` trace a basepoint loop of `St(H)`?
    pub fn contains(&self, w: &Word) -> Result<bool> {
        self.check_word(w)?;
        let base = self.stallings.base();
        Ok(self.stallings.read_word(base, w)? == Some(base))
    }

    /// Membership with witness: a product of the original generators that
    /// evaluates to `w`, obtained by lifting the accepting walk backwards
    /// through the folding trace. `None` if `w ∉ H`.
    pub fn express(&self, w: &Word) -> Result<Option<PetalWord>> {
        self.check_word(w)?;
        let base = self.stallings.base();
        match self.stallings.walk_reading(base, w)? {
            Some((walk, end)) if end == base => {
                let lifted = lift_path(&self.trace, &walk)?;
                let witness = petal_decompose(&self.flower, &lifted)?;
                debug_assert_eq!(witness.evaluate(self.alphabet, &self.generators)?, *w);
                Ok(Some(witness))
            }
            _ => Ok(None),
        }
    }

    /// Index and transversal when `St(H)` is saturated; `None` means the
    /// index is infinite.
    pub fn finite_index_data(&self) -> Option<IndexData> {
        if !self.stallings.is_saturated() {
            return None;
        }
        let bfs = self
            .stallings
            .bfs_tree()
            .expect("Stallings automaton is connected");
        let transversal = bfs
            .order
            .iter()
            .map(|&v| bfs.label_from_root(&self.stallings, v).unwrap())
            .collect();
        Some(IndexData {
            index: self.stallings.vertex_count(),
            transversal,
        })
    }

    /// Normality test: every conjugate of every generator by a single
    /// signed letter must stay in the subgroup.
    pub fn is_normal(&self) -> bool {
        self.alphabet.signed_letters().all(|letter| {
            let by = Word::reduce(self.alphabet, [letter]).unwrap();
            self.generators
                .iter()
                .all(|g| self.contains(&g.conjugate(&by).unwrap()).unwrap())
        })
    }

    /// Conjugacy test with witness: `Some(w)` with `H^w = K` when the
    /// restricted cores are isomorphic as unbased labeled digraphs.
    /// The trivial subgroup is conjugate only to itself.
    pub fn are_conjugate(&self, other: &Subgroup) -> Result<Option<Word>> {
        self.check_subgroup(other)?;
        match (self.is_trivial(), other.is_trivial()) {
            (true, true) => return Ok(Some(Word::identity(self.alphabet))),
            (true, false) | (false, true) => return Ok(None),
            (false, false) => {}
        }
        let (delta_h, p, hair_h) = self.stallings.restricted_core()?;
        let (delta_k, q, hair_k) = other.stallings.restricted_core()?;
        let Some(psi) = delta_h.isomorphic_unbased(&delta_k) else {
            return Ok(None);
        };
        let bfs = delta_k.bfs_tree().map_err(|_| Error::Disconnected)?;
        let to_image = bfs.label_from_root(&delta_k, psi[&p])?;
        let to_attach = bfs.label_from_root(&delta_k, q)?;
        let bridge = to_image.invert().multiply(&to_attach)?;
        let witness = hair_h.multiply(&bridge)?.multiply(&hair_k.invert())?;
        #[cfg(debug_assertions)]
        {
            for g in &self.generators {
                assert!(other.contains(&g.conjugate(&witness).unwrap()).unwrap());
            }
            for g in &other.generators {
                assert!(self
                    .contains(&g.conjugate(&witness.invert()).unwrap())
                    .unwrap());
            }
        }
        Ok(Some(witness))
    }

    /// Intersection via the pullback: core of the basepoint component of
    /// `St(H) × St(K)`. The result's generators are its computed basis.
    pub fn intersect(&self, other: &Subgroup) -> Result<Subgroup> {
        self.check_subgroup(other)?;
        let component = self.stallings.product_component(&other.stallings)?;
        let cored = component.core()?;
        Ok(Subgroup::from_stallings(self.alphabet, &cored))
    }

    /// Audits the full product against both Hanna Neumann bounds: the sum
    /// of reduced ranks of all components versus `2·rrk(H)·rrk(K)` and the
    /// Friedman–Mineyev `rrk(H)·rrk(K)`.
    pub fn shn_audit(&self, other: &Subgroup) -> Result<ShnAudit> {
        self.check_subgroup(other)?;
        let full = self.stallings.product(&other.stallings)?;
        let component_reduced_ranks: Vec<usize> = full
            .components()
            .iter()
            .map(|comp| {
                full.pruned_component_rank(comp)
                    .map_or(0, |rank| rank.saturating_sub(1))
            })
            .collect();
        let sum = component_reduced_ranks.iter().sum();
        let strong_bound = self.reduced_rank() * other.reduced_rank();
        Ok(ShnAudit {
            component_reduced_ranks,
            sum,
            howson_bound: 2 * strong_bound,
            strong_bound,
        })
    }

    /// Representative of `Hu ∩ Kv`, or `None` when the cosets are
    /// disjoint. Found by adding hairs reading `u` and `v` to the two
    /// automata and connecting the basepoint pair to the endpoint pair in
    /// their product.
    pub fn coset_intersect(&self, u: &Word, other: &Subgroup, v: &Word) -> Result<Option<Word>> {
        self.check_subgroup(other)?;
        self.check_word(u)?;
        self.check_word(v)?;
        let (hairy_h, p) = with_hair(&self.stallings, u)?;
        let (hairy_k, q) = with_hair(&other.stallings, v)?;
        let component = hairy_h.product_component(&hairy_k)?;
        let target = hairy_h.product_vertex(&hairy_k, p, q);
        if !component.contains_vertex(target) {
            return Ok(None);
        }
        let bfs = component.bfs_tree().map_err(|_| Error::Disconnected)?;
        let witness = bfs.label_from_root(&component, target)?;
        #[cfg(debug_assertions)]
        {
            assert!(self
                .contains(&witness.multiply(&u.invert()).unwrap())
                .unwrap());
            assert!(other
                .contains(&witness.multiply(&v.invert()).unwrap())
                .unwrap());
        }
        Ok(Some(witness))
    }

    /// Marshall Hall completion: pairs `a`-deficient with `a⁻¹`-deficient
    /// vertices positionally in BFS order and saturates `St(H)`, so the
    /// result has finite index `|V(St(H))|` and keeps `H` as a free
    /// factor. Finite-index subgroups are returned unchanged.
    pub fn hall_completion(&self) -> Subgroup {
        if self.stallings.is_saturated() {
            return self.clone();
        }
        let mut completed = self.stallings.clone();
        let order = self
            .stallings
            .bfs_tree()
            .expect("Stallings automaton is connected")
            .order;
        for g in 1..=self.alphabet.rank() {
            let sources = completed.deficient_vertices(Letter::gen(g), &order);
            let targets = completed.deficient_vertices(Letter::inv(g), &order);
            assert_eq!(sources.len(), targets.len(), "deficiency handshake");
            for (&s, &t) in sources.iter().zip(&targets) {
                completed.add_arc(s, g, t).expect("vertices are live");
            }
        }
        debug_assert!(completed.is_saturated() && completed.is_deterministic());
        Subgroup::from_parts(self.alphabet, &completed, &self.tree)
    }
}

/// Is `S` a free family? Exactly when folding its flower loses nothing.
/// A family containing the identity is never free.
pub fn is_free_family(alphabet: Alphabet, family: &[Word]) -> Result<bool> {
    for w in family {
        if w.alphabet() != alphabet {
            return Err(Error::AlphabetMismatch {
                expected: alphabet.rank(),
                found: w.alphabet().rank(),
            });
        }
        if w.is_empty() {
            return Ok(false);
        }
    }
    Ok(loss(&flower(alphabet, family)?.automaton) == 0)
}

/// Does `S` generate the whole free group? Exactly when `St(⟨S⟩)` is the
/// one-vertex bouquet.
pub fn is_generating(alphabet: Alphabet, family: &[Word]) -> Result<bool> {
    let subgroup = Subgroup::make(alphabet, family)?;
    Ok(subgroup.stallings().vertex_count() == 1
        && subgroup.stallings().positive_arc_count() == alphabet.rank())
}

/// Is `S` a basis of the free group? By Hopficity, generating with the
/// right cardinality suffices.
pub fn is_basis(alphabet: Alphabet, family: &[Word]) -> Result<bool> {
    Ok(family.len() == alphabet.rank() && is_generating(alphabet, family)?)
}

/// All subgroups of index exactly `k`, via transitive tuples of
/// permutations deduplicated by canonical breadth-first relabeling;
/// sorted by canonical form.
pub fn enumerate_index_subgroups(alphabet: Alphabet, k: usize) -> Result<Vec<Subgroup>> {
    enumerate_index_subgroups_with_cap(alphabet, k, DEFAULT_ENUMERATION_CAP)
}

/// [`enumerate_index_subgroups`] with an explicit cap on the number of
/// permutation tuples visited.
pub fn enumerate_index_subgroups_with_cap(
    alphabet: Alphabet,
    k: usize,
    cap: u64,
) -> Result<Vec<Subgroup>> {
    assert!(k >= 1, "index must be positive");
    let n = alphabet.rank();
    let perms = permutations(k);
    let tuples = (perms.len() as u64).checked_pow(n as u32);
    if tuples.is_none_or(|t| t > cap) {
        return Err(Error::EnumerationTooLarge {
            rank: n,
            index: k,
            cap,
        });
    }
    let mut canonical_forms = BTreeSet::new();
    let mut choice = vec![0usize; n];
    loop {
        let tuple: Vec<&Vec<usize>> = choice.iter().map(|&i| &perms[i]).collect();
        if is_transitive(k, &tuple) {
            canonical_forms.insert(canonical_relabel(k, &tuple));
        }
        // odometer over the n permutation choices
        let mut pos = 0;
        loop {
            if pos == n {
                let subgroups = canonical_forms
                    .iter()
                    .map(|form| {
                        let mut aut = InvolutiveAutomaton::new(alphabet);
                        for _ in 1..k {
                            aut.add_vertex();
                        }
                        for v in 0..k {
                            for g in 1..=n {
                                aut.add_arc(
                                    VertexId(v as u32),
                                    g,
                                    VertexId(form[v * n + g - 1] as u32),
                                )
                                .unwrap();
                            }
                        }
                        Subgroup::from_stallings(alphabet, &aut)
                    })
                    .collect();
                return Ok(subgroups);
            }
            choice[pos] += 1;
            if choice[pos] < perms.len() {
                break;
            }
            choice[pos] = 0;
            pos += 1;
        }
    }
}

/// All permutations of `{0..k}` in lexicographic order.
fn permutations(k: usize) -> Vec<Vec<usize>> {
    let mut all = Vec::new();
    let mut current: Vec<usize> = Vec::new();
    let mut used = vec![false; k];
    fn rec(k: usize, current: &mut Vec<usize>, used: &mut [bool], all: &mut Vec<Vec<usize>>) {
        if current.len() == k {
            all.push(current.clone());
            return;
        }
        for i in 0..k {
            if !used[i] {
                used[i] = true;
                current.push(i);
                rec(k, current, used, all);
                current.pop();
                used[i] = false;
            }
        }
    }
    rec(k, &mut current, &mut used, &mut all);
    all
}

fn is_transitive(k: usize, tuple: &[&Vec<usize>]) -> bool {
    let mut seen = vec![false; k];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    let mut count = 1;
    let inverses: Vec<Vec<usize>> = tuple.iter().map(|p| invert_permutation(p)).collect();
    while let Some(v) = queue.pop_front() {
        for (perm, inv) in tuple.iter().zip(&inverses) {
            for w in [perm[v], inv[v]] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    queue.push_back(w);
                }
            }
        }
    }
    count == k
}

fn invert_permutation(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (i, &j) in perm.iter().enumerate() {
        inv[j] = i;
    }
    inv
}

/// Flattened out-transition matrix after relabeling vertices in BFS
/// discovery order from the base (signed letters in canonical order); a
/// complete invariant of based isomorphism for saturated automata.
fn canonical_relabel(k: usize, tuple: &[&Vec<usize>]) -> Vec<usize> {
    let inverses: Vec<Vec<usize>> = tuple.iter().map(|p| invert_permutation(p)).collect();
    let mut relabel = vec![usize::MAX; k];
    let mut order = Vec::with_capacity(k);
    relabel[0] = 0;
    order.push(0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(v) = queue.pop_front() {
        for (perm, inv) in tuple.iter().zip(&inverses) {
            for w in [perm[v], inv[v]] {
                if relabel[w] == usize::MAX {
                    relabel[w] = order.len();
                    order.push(w);
                    queue.push_back(w);
                }
            }
        }
    }
    let mut form = Vec::with_capacity(k * tuple.len());
    for &old in &order {
        for perm in tuple {
            form.push(relabel[perm[old]]);
        }
    }
    form
}

/// Tree-geodesic labels from the base to every vertex, using only arcs of
/// the given spanning tree.
fn tree_paths(
    aut: &InvolutiveAutomaton,
    tree: &BTreeSet<ArcId>,
) -> Result<BTreeMap<VertexId, Word>> {
    let mut adjacency: BTreeMap<VertexId, Vec<Step>> = BTreeMap::new();
    for &id in tree {
        let arc = aut.arc(id)?;
        adjacency
            .entry(arc.source)
            .or_default()
            .push(Step::new(id, true));
        adjacency
            .entry(arc.target)
            .or_default()
            .push(Step::new(id, false));
    }
    let mut labels = BTreeMap::from([(aut.base(), Word::identity(aut.alphabet()))]);
    let mut queue = VecDeque::from([aut.base()]);
    while let Some(v) = queue.pop_front() {
        for &step in adjacency.get(&v).into_iter().flatten() {
            let end = aut.step_end(step)?;
            if !labels.contains_key(&end) {
                let letter = Word::reduce(aut.alphabet(), [aut.step_letter(step)?])?;
                let label = labels[&v].multiply(&letter)?;
                labels.insert(end, label);
                queue.push_back(end);
            }
        }
    }
    if labels.len() != aut.vertex_count() {
        return Err(Error::Disconnected);
    }
    Ok(labels)
}

/// The basis `S_T`: one reduced word per positive arc outside the tree,
/// in ascending arc id order.
fn basis_from_tree(aut: &InvolutiveAutomaton, tree: &BTreeSet<ArcId>) -> Result<Vec<Word>> {
    let paths = tree_paths(aut, tree)?;
    let mut basis = Vec::new();
    for arc in aut.arcs() {
        if tree.contains(&arc.id) {
            continue;
        }
        let letter = Word::reduce(aut.alphabet(), [Letter::gen(arc.label)])?;
        let word = paths[&arc.source]
            .multiply(&letter)?
            .multiply(&paths[&arc.target].invert())?;
        debug_assert!(!word.is_empty());
        basis.push(word);
    }
    Ok(basis)
}

/// Clone of the automaton extended with a hair so that `w` is readable
/// from the base; returns the endpoint of the reading.
fn with_hair(aut: &InvolutiveAutomaton, w: &Word) -> Result<(InvolutiveAutomaton, VertexId)> {
    let mut aut = aut.clone();
    let mut cur = aut.base();
    for &letter in w.letters() {
        match aut.steps_reading(cur, letter)?.first() {
            Some(&step) => cur = aut.step_end(step)?,
            None => {
                let next = aut.add_vertex();
                if letter.is_inverse() {
                    aut.add_arc(next, letter.index(), cur)?;
                } else {
                    aut.add_arc(cur, letter.index(), next)?;
                }
                cur = next;
            }
        }
    }
    Ok((aut, cur))
}
