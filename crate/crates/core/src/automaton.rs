//! Finite involutive automata over a ranked alphabet.
//!
//! Only positive arcs are stored; traversing an arc backwards reads the
//! inverse letter. Vertex and arc ids are stable small integers: deleted
//! ids are tombstoned and never reused, so folding traces can refer to
//! them after the fact.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::words::{Alphabet, Letter, Word};

/// Stable vertex identifier within one automaton.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexId(pub u32);

/// Stable arc identifier within one automaton.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ArcId(pub u32);

/// A positive arc; the inverse arc is implicit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Arc {
    pub id: ArcId,
    pub source: VertexId,
    pub target: VertexId,
    /// Positive generator index (1-based).
    pub label: usize,
}

/// One traversal step of a walk: a positive arc, read forwards (its label)
/// or backwards (the inverse label).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Step {
    pub arc: ArcId,
    pub forward: bool,
}

impl Step {
    pub fn new(arc: ArcId, forward: bool) -> Self {
        Step { arc, forward }
    }

    pub fn reversed(&self) -> Self {
        Step {
            arc: self.arc,
            forward: !self.forward,
        }
    }

    fn backtracks(&self, next: &Step) -> bool {
        self.arc == next.arc && self.forward != next.forward
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct VertexData {
    /// Positive arcs leaving this vertex, in insertion order.
    out: Vec<ArcId>,
    /// Positive arcs entering this vertex, in insertion order.
    inc: Vec<ArcId>,
}

/// A finite involutive automaton with a basepoint, stored by its positive
/// part.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvolutiveAutomaton {
    alphabet: Alphabet,
    base: VertexId,
    vertices: Vec<Option<VertexData>>,
    arcs: Vec<Option<Arc>>,
}

impl InvolutiveAutomaton {
    /// A single basepoint vertex and no arcs (the trivial subgroup).
    pub fn new(alphabet: Alphabet) -> Self {
        InvolutiveAutomaton {
            alphabet,
            base: VertexId(0),
            vertices: vec![Some(VertexData::default())],
            arcs: Vec::new(),
        }
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn base(&self) -> VertexId {
        self.base
    }

    pub fn set_base(&mut self, v: VertexId) -> Result<()> {
        self.vertex_data(v)?;
        self.base = v;
        Ok(())
    }

    pub fn add_vertex(&mut self) -> VertexId {
        let id = VertexId(self.vertices.len() as u32);
        self.vertices.push(Some(VertexData::default()));
        id
    }

    pub fn add_arc(&mut self, source: VertexId, label: usize, target: VertexId) -> Result<ArcId> {
        self.alphabet.check_generator(label)?;
        self.vertex_data(source)?;
        self.vertex_data(target)?;
        let id = ArcId(self.arcs.len() as u32);
        self.arcs.push(Some(Arc {
            id,
            source,
            target,
            label,
        }));
        self.vertices[source.0 as usize]
            .as_mut()
            .unwrap()
            .out
            .push(id);
        self.vertices[target.0 as usize]
            .as_mut()
            .unwrap()
            .inc
            .push(id);
        Ok(id)
    }

    fn vertex_data(&self, v: VertexId) -> Result<&VertexData> {
        self.vertices
            .get(v.0 as usize)
            .and_then(Option::as_ref)
            .ok_or(Error::UnknownVertex(v.0))
    }

    pub fn arc(&self, id: ArcId) -> Result<Arc> {
        self.arcs
            .get(id.0 as usize)
            .and_then(Option::as_ref)
            .copied()
            .ok_or(Error::UnknownArc(id.0))
    }

    pub fn contains_vertex(&self, v: VertexId) -> bool {
        self.vertex_data(v).is_ok()
    }

    /// Live vertices in ascending id order.
    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.vertices
            .iter()
            .enumerate()
            .filter_map(|(i, d)| d.as_ref().map(|_| VertexId(i as u32)))
    }

    /// Live positive arcs in ascending id order.
    pub fn arcs(&self) -> impl Iterator<Item = Arc> + '_ {
        self.arcs.iter().filter_map(|a| *a)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.iter().filter(|d| d.is_some()).count()
    }

    pub fn positive_arc_count(&self) -> usize {
        self.arcs.iter().filter(|a| a.is_some()).count()
    }

    /// Upper bound on vertex ids ever issued (tombstones included).
    pub fn vertex_id_bound(&self) -> u32 {
        self.vertices.len() as u32
    }

    /// Degree in the underlying undirected graph; a loop counts twice.
    pub fn degree(&self, v: VertexId) -> Result<usize> {
        let data = self.vertex_data(v)?;
        Ok(data.out.len() + data.inc.len())
    }

    /// Arcs readable from `v` with the signed letter, as steps leaving `v`,
    /// in ascending arc id order.
    pub fn steps_reading(&self, v: VertexId, letter: Letter) -> Result<Vec<Step>> {
        let data = self.vertex_data(v)?;
        let list = if letter.is_inverse() {
            &data.inc
        } else {
            &data.out
        };
        let mut steps: Vec<Step> = list
            .iter()
            .filter(|&&id| self.arc(id).map(|a| a.label == letter.index()) == Ok(true))
            .map(|&id| Step::new(id, !letter.is_inverse()))
            .collect();
        steps.sort_by_key(|s| s.arc);
        Ok(steps)
    }

    /// Start vertex of a step.
    pub fn step_start(&self, step: Step) -> Result<VertexId> {
        let arc = self.arc(step.arc)?;
        Ok(if step.forward { arc.source } else { arc.target })
    }

    /// End vertex of a step.
    pub fn step_end(&self, step: Step) -> Result<VertexId> {
        let arc = self.arc(step.arc)?;
        Ok(if step.forward { arc.target } else { arc.source })
    }

    /// Signed letter read by a step.
    pub fn step_letter(&self, step: Step) -> Result<Letter> {
        let arc = self.arc(step.arc)?;
        Ok(if step.forward {
            Letter::gen(arc.label)
        } else {
            Letter::inv(arc.label)
        })
    }

    /// Label of a walk, reduced.
    pub fn walk_label(&self, walk: &[Step]) -> Result<Word> {
        let letters = walk
            .iter()
            .map(|&s| self.step_letter(s))
            .collect::<Result<Vec<_>>>()?;
        Word::reduce(self.alphabet, letters)
    }

    /// Detaches and tombstones an arc.
    pub(crate) fn remove_arc(&mut self, id: ArcId) -> Result<()> {
        let arc = self.arc(id)?;
        let src = self.vertices[arc.source.0 as usize].as_mut().unwrap();
        src.out.retain(|&a| a != id);
        let tgt = self.vertices[arc.target.0 as usize].as_mut().unwrap();
        tgt.inc.retain(|&a| a != id);
        self.arcs[id.0 as usize] = None;
        Ok(())
    }

    /// Tombstones an isolated vertex.
    pub(crate) fn remove_vertex(&mut self, v: VertexId) -> Result<()> {
        let data = self.vertex_data(v)?;
        assert!(
            data.out.is_empty() && data.inc.is_empty(),
            "remove_vertex on a vertex with incident arcs"
        );
        self.vertices[v.0 as usize] = None;
        Ok(())
    }

    /// Re-points every arc incident to `from` onto `to`, then tombstones
    /// `from`. The basepoint follows the merge.
    pub(crate) fn merge_vertex_into(&mut self, from: VertexId, to: VertexId) -> Result<()> {
        if from == to {
            return Ok(());
        }
        self.vertex_data(to)?;
        let data = self.vertex_data(from)?.clone();
        let mut incident: Vec<ArcId> = data.out.iter().chain(data.inc.iter()).copied().collect();
        incident.sort();
        incident.dedup();
        for id in incident {
            let mut arc = self.arc(id)?;
            self.remove_arc(id)?;
            if arc.source == from {
                arc.source = to;
            }
            if arc.target == from {
                arc.target = to;
            }
            self.arcs[id.0 as usize] = Some(arc);
            self.vertices[arc.source.0 as usize]
                .as_mut()
                .unwrap()
                .out
                .push(id);
            self.vertices[arc.target.0 as usize]
                .as_mut()
                .unwrap()
                .inc
                .push(id);
        }
        self.vertices[from.0 as usize] = None;
        if self.base == from {
            self.base = to;
        }
        Ok(())
    }

    /// A vertex violates determinism if two distinct arcs read the same
    /// signed letter from it.
    pub fn is_deterministic(&self) -> bool {
        self.vertices().all(|v| self.violation_at(v).is_none())
    }

    /// The first determinism violation at `v`: smallest signed letter, then
    /// the two smallest arc ids reading it.
    pub(crate) fn violation_at(&self, v: VertexId) -> Option<(Letter, ArcId, ArcId)> {
        for letter in self.alphabet.signed_letters() {
            let steps = self.steps_reading(v, letter).ok()?;
            if steps.len() >= 2 {
                return Some((letter, steps[0].arc, steps[1].arc));
            }
        }
        None
    }

    /// Follows the unique path reading `w` from `start`; `None` if reading
    /// blocks. Requires a deterministic automaton.
    pub fn read_word(&self, start: VertexId, w: &Word) -> Result<Option<VertexId>> {
        Ok(self.walk_reading(start, w)?.map(|(_, end)| end))
    }

    /// Like [`read_word`](Self::read_word) but also returns the walk.
    pub fn walk_reading(&self, start: VertexId, w: &Word) -> Result<Option<(Vec<Step>, VertexId)>> {
        if !self.is_deterministic() {
            return Err(Error::NotDeterministic);
        }
        if w.alphabet() != self.alphabet {
            return Err(Error::AlphabetMismatch {
                expected: self.alphabet.rank(),
                found: w.alphabet().rank(),
            });
        }
        self.vertex_data(start)?;
        let mut cur = start;
        let mut walk = Vec::with_capacity(w.len());
        for &letter in w.letters() {
            match self.steps_reading(cur, letter)?.first() {
                Some(&step) => {
                    walk.push(step);
                    cur = self.step_end(step)?;
                }
                None => return Ok(None),
            }
        }
        Ok(Some((walk, cur)))
    }

    /// Whether every live vertex is reachable from the basepoint.
    pub fn is_connected(&self) -> bool {
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::from([self.base]);
        seen.insert(self.base);
        while let Some(v) = queue.pop_front() {
            let data = match self.vertex_data(v) {
                Ok(d) => d,
                Err(_) => return false,
            };
            for &id in data.out.iter().chain(data.inc.iter()) {
                let arc = self.arc(id).unwrap();
                for w in [arc.source, arc.target] {
                    if seen.insert(w) {
                        queue.push_back(w);
                    }
                }
            }
        }
        seen.len() == self.vertex_count()
    }

    /// A vertex is saturated when every signed letter is readable from it.
    pub fn is_saturated(&self) -> bool {
        self.vertices().all(|v| {
            self.alphabet
                .signed_letters()
                .all(|l| !self.steps_reading(v, l).unwrap().is_empty())
        })
    }

    /// Vertices missing the given signed letter, in BFS order.
    pub fn deficient_vertices(&self, letter: Letter, order: &[VertexId]) -> Vec<VertexId> {
        order
            .iter()
            .copied()
            .filter(|&v| self.steps_reading(v, letter).map(|s| s.is_empty()) == Ok(true))
            .collect()
    }

    /// Iteratively removes non-basepoint vertices of total degree ≤ 1.
    /// The result recognizes the same subgroup and is idempotent.
    pub fn core(&self) -> Result<InvolutiveAutomaton> {
        if !self.is_deterministic() {
            return Err(Error::NotDeterministic);
        }
        if !self.is_connected() {
            return Err(Error::Disconnected);
        }
        let mut aut = self.clone();
        aut.prune_hairs(true);
        Ok(aut)
    }

    /// Degree-≤1 pruning; `keep_base` exempts the basepoint.
    pub(crate) fn prune_hairs(&mut self, keep_base: bool) {
        let mut queue: VecDeque<VertexId> = self.vertices().collect();
        while let Some(v) = queue.pop_front() {
            if !self.contains_vertex(v) || (keep_base && v == self.base) {
                continue;
            }
            if self.degree(v).unwrap() <= 1 {
                let data = self.vertex_data(v).unwrap().clone();
                for id in data.out.iter().chain(data.inc.iter()) {
                    let arc = self.arc(*id).unwrap();
                    let other = if arc.source == v {
                        arc.target
                    } else {
                        arc.source
                    };
                    self.remove_arc(*id).unwrap();
                    queue.push_back(other);
                }
                self.remove_vertex(v).unwrap();
            }
        }
    }

    /// Strips the basepoint hair of a core automaton. Returns the stripped
    /// automaton (its basepoint moved to the attachment vertex, which
    /// carries no meaning), the attachment vertex, and the hair label.
    pub fn restricted_core(&self) -> Result<(InvolutiveAutomaton, VertexId, Word)> {
        let core = self.core()?;
        if core.positive_arc_count() == 0 {
            return Err(Error::TrivialSubgroup);
        }
        let mut stripped = core.clone();
        let mut hair = Vec::new();
        let mut attach = stripped.base;
        while stripped.degree(attach)? == 1 {
            let data = stripped.vertex_data(attach)?.clone();
            let id = *data.out.iter().chain(data.inc.iter()).next().unwrap();
            let arc = stripped.arc(id)?;
            let step = Step::new(id, arc.source == attach);
            hair.push(stripped.step_letter(step)?);
            let next = stripped.step_end(step)?;
            stripped.remove_arc(id)?;
            stripped.remove_vertex(attach)?;
            attach = next;
        }
        stripped.base = attach;
        let hair = Word::reduce(self.alphabet, hair)?;
        Ok((stripped, attach, hair))
    }

    /// BFS tree rooted at the basepoint, exploring signed letters in
    /// canonical order and parallel arcs by ascending id.
    pub fn bfs_tree(&self) -> Result<BfsTree> {
        let mut order = vec![self.base];
        let mut parent = BTreeMap::new();
        let mut tree_arcs = BTreeSet::new();
        let mut seen: BTreeSet<VertexId> = BTreeSet::from([self.base]);
        let mut queue = VecDeque::from([self.base]);
        while let Some(v) = queue.pop_front() {
            for letter in self.alphabet.signed_letters() {
                for step in self.steps_reading(v, letter)? {
                    let end = self.step_end(step)?;
                    if seen.insert(end) {
                        order.push(end);
                        parent.insert(end, (v, step));
                        tree_arcs.insert(step.arc);
                        queue.push_back(end);
                    }
                }
            }
        }
        if seen.len() != self.vertex_count() {
            return Err(Error::Disconnected);
        }
        Ok(BfsTree {
            root: self.base,
            order,
            parent,
            tree_arcs,
        })
    }

    /// Arcs of the BFS spanning tree; `|tree| = |V| − 1` when connected.
    pub fn spanning_tree(&self) -> Result<BTreeSet<ArcId>> {
        Ok(self.bfs_tree()?.tree_arcs)
    }

    /// Graph rank `1 − |V| + |E⁺|` of a connected automaton.
    pub fn graph_rank(&self) -> Result<usize> {
        if !self.is_connected() {
            return Err(Error::Disconnected);
        }
        Ok(1 + self.positive_arc_count() - self.vertex_count())
    }

    /// The vertex id a pair `(v1, v2)` maps to in [`product`](Self::product)
    /// and [`product_component`](Self::product_component).
    pub fn product_vertex(
        &self,
        other: &InvolutiveAutomaton,
        v1: VertexId,
        v2: VertexId,
    ) -> VertexId {
        VertexId(v1.0 * other.vertex_id_bound() + v2.0)
    }

    /// Full pullback product on the cartesian vertex set; possibly
    /// disconnected. One arc per pair of equally-labeled arcs.
    pub fn product(&self, other: &InvolutiveAutomaton) -> Result<InvolutiveAutomaton> {
        self.check_same_alphabet(other)?;
        let stride = other.vertex_id_bound() as usize;
        let mut vertices = vec![None; self.vertices.len() * stride];
        for v1 in self.vertices() {
            for v2 in other.vertices() {
                vertices[v1.0 as usize * stride + v2.0 as usize] = Some(VertexData::default());
            }
        }
        let mut prod = InvolutiveAutomaton {
            alphabet: self.alphabet,
            base: self.product_vertex(other, self.base, other.base),
            vertices,
            arcs: Vec::new(),
        };
        for a1 in self.arcs() {
            for a2 in other.arcs() {
                if a1.label == a2.label {
                    prod.add_arc(
                        self.product_vertex(other, a1.source, a2.source),
                        a1.label,
                        self.product_vertex(other, a1.target, a2.target),
                    )?;
                }
            }
        }
        Ok(prod)
    }

    /// Basepoint component of the pullback product, materialized by
    /// synchronized BFS; vertex ids follow the same convention as
    /// [`product`](Self::product).
    pub fn product_component(&self, other: &InvolutiveAutomaton) -> Result<InvolutiveAutomaton> {
        self.check_same_alphabet(other)?;
        let stride = other.vertex_id_bound() as usize;
        let mut prod = InvolutiveAutomaton {
            alphabet: self.alphabet,
            base: self.product_vertex(other, self.base, other.base),
            vertices: vec![None; self.vertices.len() * stride],
            arcs: Vec::new(),
        };
        let ensure = |prod: &mut InvolutiveAutomaton, id: VertexId| -> bool {
            if prod.vertices[id.0 as usize].is_none() {
                prod.vertices[id.0 as usize] = Some(VertexData::default());
                true
            } else {
                false
            }
        };
        let start = prod.base;
        ensure(&mut prod, start);
        let mut queue = VecDeque::from([(self.base, other.base)]);
        while let Some((p, q)) = queue.pop_front() {
            for letter in self.alphabet.signed_letters() {
                for s1 in self.steps_reading(p, letter)? {
                    for s2 in other.steps_reading(q, letter)? {
                        let end1 = self.step_end(s1)?;
                        let end2 = other.step_end(s2)?;
                        let end = self.product_vertex(other, end1, end2);
                        if ensure(&mut prod, end) {
                            queue.push_back((end1, end2));
                        }
                        // materialize each product arc once, from its source side
                        if letter.is_inverse() {
                            continue;
                        }
                        prod.add_arc(self.product_vertex(other, p, q), letter.index(), end)?;
                    }
                }
            }
        }
        Ok(prod)
    }

    fn check_same_alphabet(&self, other: &InvolutiveAutomaton) -> Result<()> {
        if self.alphabet == other.alphabet {
            Ok(())
        } else {
            Err(Error::AlphabetMismatch {
                expected: self.alphabet.rank(),
                found: other.alphabet.rank(),
            })
        }
    }

    /// Connected components of the underlying undirected graph, each sorted
    /// ascending, listed in ascending order of their minimal vertex.
    pub fn components(&self) -> Vec<Vec<VertexId>> {
        let mut seen = BTreeSet::new();
        let mut components = Vec::new();
        for start in self.vertices() {
            if seen.contains(&start) {
                continue;
            }
            let mut comp = BTreeSet::from([start]);
            let mut queue = VecDeque::from([start]);
            seen.insert(start);
            while let Some(v) = queue.pop_front() {
                let data = self.vertex_data(v).unwrap();
                for &id in data.out.iter().chain(data.inc.iter()) {
                    let arc = self.arc(id).unwrap();
                    for w in [arc.source, arc.target] {
                        if seen.insert(w) {
                            comp.insert(w);
                            queue.push_back(w);
                        }
                    }
                }
            }
            components.push(comp.into_iter().collect());
        }
        components
    }

    /// Graph rank of the cyclic core of the induced subgraph on `verts`
    /// (degree-≤1 pruning with no basepoint exception); `None` when the
    /// component prunes away entirely (it was a tree).
    pub fn pruned_component_rank(&self, verts: &[VertexId]) -> Option<usize> {
        let vset: BTreeSet<VertexId> = verts.iter().copied().collect();
        let mut arcs: Vec<Arc> = self
            .arcs()
            .filter(|a| vset.contains(&a.source) && vset.contains(&a.target))
            .collect();
        let mut alive = vset;
        loop {
            let mut degree: BTreeMap<VertexId, usize> = alive.iter().map(|&v| (v, 0)).collect();
            for a in &arcs {
                *degree.get_mut(&a.source).unwrap() += 1;
                *degree.get_mut(&a.target).unwrap() += 1;
            }
            let prune: BTreeSet<VertexId> = degree
                .iter()
                .filter(|(_, &d)| d <= 1)
                .map(|(&v, _)| v)
                .collect();
            if prune.is_empty() {
                break;
            }
            alive.retain(|v| !prune.contains(v));
            arcs.retain(|a| !prune.contains(&a.source) && !prune.contains(&a.target));
        }
        if alive.is_empty() {
            None
        } else {
            Some(1 + arcs.len() - alive.len())
        }
    }

    /// The unique label- and basepoint-preserving isomorphism found by
    /// parallel BFS, if one exists. Both automata must be deterministic and
    /// connected.
    pub fn isomorphic_based(
        &self,
        other: &InvolutiveAutomaton,
    ) -> Option<BTreeMap<VertexId, VertexId>> {
        self.isomorphism_seeded(other, self.base, other.base)
    }

    /// Basepoint-free isomorphism: tries each vertex of `other` as the
    /// image of this automaton's minimal vertex, in ascending order.
    pub fn isomorphic_unbased(
        &self,
        other: &InvolutiveAutomaton,
    ) -> Option<BTreeMap<VertexId, VertexId>> {
        let pivot = self.vertices().next()?;
        other
            .vertices()
            .find_map(|cand| self.isomorphism_seeded(other, pivot, cand))
    }

    fn isomorphism_seeded(
        &self,
        other: &InvolutiveAutomaton,
        seed: VertexId,
        image: VertexId,
    ) -> Option<BTreeMap<VertexId, VertexId>> {
        debug_assert!(self.is_deterministic() && other.is_deterministic());
        if self.alphabet != other.alphabet
            || self.vertex_count() != other.vertex_count()
            || self.positive_arc_count() != other.positive_arc_count()
        {
            return None;
        }
        let mut map = BTreeMap::from([(seed, image)]);
        let mut rmap = BTreeMap::from([(image, seed)]);
        let mut queue = VecDeque::from([(seed, image)]);
        while let Some((v, w)) = queue.pop_front() {
            for letter in self.alphabet.signed_letters() {
                let here = self.steps_reading(v, letter).ok()?;
                let there = other.steps_reading(w, letter).ok()?;
                match (here.first(), there.first()) {
                    (None, None) => {}
                    (Some(&s1), Some(&s2)) => {
                        let e1 = self.step_end(s1).ok()?;
                        let e2 = other.step_end(s2).ok()?;
                        match (map.get(&e1), rmap.get(&e2)) {
                            (None, None) => {
                                map.insert(e1, e2);
                                rmap.insert(e2, e1);
                                queue.push_back((e1, e2));
                            }
                            (Some(&img), Some(&pre)) if img == e2 && pre == e1 => {}
                            _ => return None,
                        }
                    }
                    _ => return None,
                }
            }
        }
        if map.len() == self.vertex_count() {
            Some(map)
        } else {
            None
        }
    }

    /// Deterministic DOT rendering: positive arcs only, basepoint
    /// double-circled, one color per label.
    pub fn to_dot(&self) -> String {
        const PALETTE: [&str; 8] = [
            "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf", "#7f7f7f",
        ];
        let mut out = String::from(
            "digraph stallings {\n  rankdir=LR;\n  node [shape=circle, label=\"\", width=0.25];\n",
        );
        for v in self.vertices() {
            if v == self.base {
                let _ = writeln!(out, "  v{} [shape=doublecircle];", v.0);
            } else {
                let _ = writeln!(out, "  v{};", v.0);
            }
        }
        for arc in self.arcs() {
            let color = PALETTE[(arc.label - 1) % PALETTE.len()];
            let _ = writeln!(
                out,
                "  v{} -> v{} [label=\"{}\", color=\"{}\", fontcolor=\"{}\"];",
                arc.source.0,
                arc.target.0,
                Letter::gen(arc.label),
                color,
                color
            );
        }
        out.push_str("}\n");
        out
    }

    /// Line-oriented text format, vertex ids compacted to `0..k`.
    pub fn to_text(&self) -> String {
        let live: Vec<VertexId> = self.vertices().collect();
        let renumber: BTreeMap<VertexId, usize> =
            live.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut out = String::new();
        let _ = writeln!(out, "alphabet {}", self.alphabet.rank());
        let _ = writeln!(out, "vertices {}", live.len());
        let _ = writeln!(out, "base {}", renumber[&self.base]);
        for arc in self.arcs() {
            let _ = writeln!(
                out,
                "arc {} {} {}",
                renumber[&arc.source],
                Letter::gen(arc.label),
                renumber[&arc.target]
            );
        }
        out
    }

    /// Parses the text format produced by [`to_text`](Self::to_text).
    pub fn from_text(text: &str) -> Result<InvolutiveAutomaton> {
        let fail = |reason: String| Error::InvalidAutomaton(reason);
        let mut alphabet = None;
        let mut aut: Option<InvolutiveAutomaton> = None;
        let mut base_seen = false;
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            match fields.as_slice() {
                ["alphabet", n] => {
                    let rank = n.parse().map_err(|_| fail(format!("bad rank {n:?}")))?;
                    alphabet = Some(Alphabet::new(rank));
                }
                ["vertices", k] => {
                    let alphabet =
                        alphabet.ok_or_else(|| fail("alphabet line must come first".into()))?;
                    let k: usize = k
                        .parse()
                        .map_err(|_| fail(format!("bad vertex count {k:?}")))?;
                    if k == 0 {
                        return Err(fail("automaton needs at least one vertex".into()));
                    }
                    let mut a = InvolutiveAutomaton::new(alphabet);
                    for _ in 1..k {
                        a.add_vertex();
                    }
                    aut = Some(a);
                }
                ["base", v] => {
                    let aut = aut
                        .as_mut()
                        .ok_or_else(|| fail("vertices line must precede base".into()))?;
                    let v: u32 = v
                        .parse()
                        .map_err(|_| fail(format!("bad base vertex {v:?}")))?;
                    aut.set_base(VertexId(v))
                        .map_err(|_| fail(format!("base vertex {v} out of range")))?;
                    base_seen = true;
                }
                ["arc", src, label, dst] => {
                    let aut = aut
                        .as_mut()
                        .ok_or_else(|| fail("vertices line must precede arcs".into()))?;
                    let src: u32 = src
                        .parse()
                        .map_err(|_| fail(format!("bad arc source {src:?}")))?;
                    let dst: u32 = dst
                        .parse()
                        .map_err(|_| fail(format!("bad arc target {dst:?}")))?;
                    let word = Word::parse(aut.alphabet, label)
                        .map_err(|e| fail(format!("bad arc label {label:?}: {e}")))?;
                    let letter = match word.letters() {
                        [l] if !l.is_inverse() => *l,
                        _ => {
                            return Err(fail(format!(
                                "arc label {label:?} is not a positive letter"
                            )))
                        }
                    };
                    aut.add_arc(VertexId(src), letter.index(), VertexId(dst))
                        .map_err(|e| fail(format!("bad arc {src} {label} {dst}: {e}")))?;
                }
                _ => return Err(fail(format!("unrecognized line {line:?}"))),
            }
        }
        let aut = aut.ok_or_else(|| fail("missing vertices line".into()))?;
        if !base_seen {
            return Err(fail("missing base line".into()));
        }
        Ok(aut)
    }

    /// Checks that a step sequence is a reduced walk from `from` to `to`.
    pub fn check_reduced_walk(&self, walk: &[Step], from: VertexId, to: VertexId) -> Result<()> {
        let mut cur = from;
        for (i, &step) in walk.iter().enumerate() {
            if self.step_start(step)? != cur {
                return Err(Error::InvalidPath("disconnected step sequence"));
            }
            if i > 0 && walk[i - 1].backtracks(&step) {
                return Err(Error::InvalidPath("walk backtracks"));
            }
            cur = self.step_end(step)?;
        }
        if cur != to {
            return Err(Error::InvalidPath(
                "walk does not end at the required vertex",
            ));
        }
        Ok(())
    }
}

/// Breadth-first spanning tree data rooted at the basepoint.
#[derive(Debug, Clone)]
pub struct BfsTree {
    pub root: VertexId,
    /// Vertices in discovery order; the root comes first.
    pub order: Vec<VertexId>,
    parent: BTreeMap<VertexId, (VertexId, Step)>,
    pub tree_arcs: BTreeSet<ArcId>,
}

impl BfsTree {
    /// Label of the tree geodesic from the root to `v`.
    pub fn label_from_root(&self, aut: &InvolutiveAutomaton, v: VertexId) -> Result<Word> {
        let mut letters = Vec::new();
        let mut cur = v;
        while cur != self.root {
            let (parent, step) = self.parent[&cur];
            letters.push(aut.step_letter(step)?);
            cur = parent;
        }
        letters.reverse();
        Word::reduce(aut.alphabet(), letters)
    }

    /// Reduced label of the tree path from `from` to `to` (through the
    /// root; the common prefix cancels, leaving the geodesic label).
    pub fn label_between(
        &self,
        aut: &InvolutiveAutomaton,
        from: VertexId,
        to: VertexId,
    ) -> Result<Word> {
        self.label_from_root(aut, from)?
            .invert()
            .multiply(&self.label_from_root(aut, to)?)
    }
}

/// Builds the flower automaton of a family of reduced words: one petal per
/// nonempty generator, wedged at the basepoint. Records each petal's step
/// sequence for later decomposition of walks.
pub fn flower(alphabet: Alphabet, generators: &[Word]) -> Result<Flower> {
    let mut aut = InvolutiveAutomaton::new(alphabet);
    let mut petals = Vec::new();
    for word in generators {
        if word.alphabet() != alphabet {
            return Err(Error::AlphabetMismatch {
                expected: alphabet.rank(),
                found: word.alphabet().rank(),
            });
        }
        if word.is_empty() {
            continue;
        }
        let mut steps = Vec::with_capacity(word.len());
        let mut cur = aut.base();
        for (i, &letter) in word.letters().iter().enumerate() {
            let next = if i + 1 == word.len() {
                aut.base()
            } else {
                aut.add_vertex()
            };
            let id = if letter.is_inverse() {
                aut.add_arc(next, letter.index(), cur)?
            } else {
                aut.add_arc(cur, letter.index(), next)?
            };
            steps.push(Step::new(id, !letter.is_inverse()));
            cur = next;
        }
        petals.push(steps);
    }
    Ok(Flower {
        automaton: aut,
        petals,
    })
}

/// A flower automaton together with its petal structure.
#[derive(Debug, Clone)]
pub struct Flower {
    pub automaton: InvolutiveAutomaton,
    /// One step sequence per nonempty generator, reading it from the base.
    pub petals: Vec<Vec<Step>>,
}
