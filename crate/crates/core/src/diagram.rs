//! Link diagrams in an n-punctured disk, given as PD codes.
//!
//! Each crossing is a quadruple `[a, b, c, d]` of arc identifiers listed
//! counterclockwise, starting from the incoming under-strand. Puncture data
//! lives on arcs: `arc_rays[e][i]` counts how often a fixed generic ray from
//! puncture `i` to the disk boundary crosses arc `e`. Only parities matter.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use itertools::Itertools;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type ArcId = u32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DiagramError {
    #[error("malformed diagram document: {0}")]
    Malformed(String),
    #[error("open diagram: arc {arc} appears {count} time(s), expected 2")]
    OpenDiagram { arc: ArcId, count: usize },
    #[error("arc identifiers must be positive, found 0")]
    ZeroArc,
    #[error("ray vector for arc {arc} has length {len}, expected {expected}")]
    RayLength { arc: ArcId, len: usize, expected: usize },
    #[error("ray data given for unknown arc {0}")]
    UnknownRayArc(ArcId),
    #[error("free loop {index} has length {len}, expected {expected}")]
    LoopLength { index: usize, len: usize, expected: usize },
    #[error("free loop {index} has a non-binary enclosure entry")]
    LoopEntry { index: usize },
    #[error("too many punctures ({0}); at most 64 are supported")]
    TooManyPunctures(usize),
    #[error("inconsistent orientation: the strand through arc {0} meets under-crossings in both directions")]
    Orientation(ArcId),
    #[error("diagram is not planar (Euler characteristic check failed)")]
    NonPlanar,
    #[error("ray data for puncture {0} does not come from a ray to the boundary")]
    InconsistentRays(usize),
    #[error("state has length {got}, diagram has {expected} crossings")]
    StateLength { got: usize, expected: usize },
    #[error("unknown arc {0}")]
    UnknownArc(ArcId),
    #[error("unknown free loop {0}")]
    UnknownLoop(usize),
    #[error("move not applicable at {target}: {reason}")]
    NotApplicable { target: String, reason: String },
}

/// A set of punctures, stored as a bitmask (bit `i` is puncture `i + 1`).
///
/// Ordered lexicographically on the sorted element list, so `{1} < {1,2} < {2}`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct PunctureSet(pub u64);

impl PunctureSet {
    pub const EMPTY: PunctureSet = PunctureSet(0);

    pub fn from_indices(idx: impl IntoIterator<Item = usize>) -> Self {
        PunctureSet(idx.into_iter().fold(0, |m, i| m | (1u64 << i)))
    }

    /// Builds a set from a 0/1 vector, entry `i` being puncture `i + 1`.
    pub fn from_bits(v: &[u8]) -> Self {
        Self::from_indices(v.iter().enumerate().filter(|(_, &b)| b % 2 == 1).map(|(i, _)| i))
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    /// Zero-based puncture indices in increasing order.
    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..64).filter(move |&i| self.contains(i))
    }

    pub fn to_bits(&self, n: usize) -> Vec<u8> {
        (0..n).map(|i| self.contains(i) as u8).collect()
    }

    pub fn xor(self, other: Self) -> Self {
        PunctureSet(self.0 ^ other.0)
    }

    pub fn intersect(self, other: Self) -> Self {
        PunctureSet(self.0 & other.0)
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.0 & !other.0 == 0
    }
}

impl Ord for PunctureSet {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.indices().cmp(other.indices())
    }
}

impl PartialOrd for PunctureSet {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for PunctureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.indices().map(|i| i + 1).join(","))
    }
}

impl fmt::Debug for PunctureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Pos,
    Neg,
}

impl Sign {
    pub fn value(self) -> i64 {
        match self {
            Sign::Pos => 1,
            Sign::Neg => -1,
        }
    }
}

/// Something a Reidemeister move can be applied to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strand {
    Arc(ArcId),
    /// Index into the diagram's free loops.
    Loop(usize),
}

impl fmt::Display for Strand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strand::Arc(a) => write!(f, "arc {a}"),
            Strand::Loop(i) => write!(f, "free loop {i}"),
        }
    }
}

/// Position of an arc end: crossing index and slot 0..4.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Slot {
    pub crossing: usize,
    pub pos: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct ArcEnds {
    tail: Slot,
    head: Slot,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CrossingSigns {
    pub n_plus: usize,
    pub n_minus: usize,
    pub writhe: i64,
}

#[derive(Clone, Debug)]
pub struct Diagram {
    n_punctures: usize,
    crossings: Vec<[ArcId; 4]>,
    arc_rays: BTreeMap<ArcId, Vec<u32>>,
    free_loops: Vec<PunctureSet>,
    ends: BTreeMap<ArcId, ArcEnds>,
    signs: Vec<Sign>,
}

impl PartialEq for Diagram {
    fn eq(&self, other: &Self) -> bool {
        self.n_punctures == other.n_punctures
            && self.crossings == other.crossings
            && self.arc_rays == other.arc_rays
            && self.free_loops == other.free_loops
    }
}

impl Eq for Diagram {}

#[derive(Serialize, Deserialize)]
struct DiagramFile {
    punctures: usize,
    crossings: Vec<[ArcId; 4]>,
    #[serde(default)]
    arc_rays: BTreeMap<String, Vec<u32>>,
    #[serde(default)]
    free_loops: Vec<Vec<u8>>,
}

fn opposite(pos: usize) -> usize {
    (pos + 2) % 4
}

impl Diagram {
    /// Builds and validates a diagram. Missing ray entries default to zero.
    pub fn new(
        n_punctures: usize,
        crossings: Vec<[ArcId; 4]>,
        arc_rays: BTreeMap<ArcId, Vec<u32>>,
        free_loops: Vec<Vec<u8>>,
    ) -> Result<Self, DiagramError> {
        if n_punctures > 64 {
            return Err(DiagramError::TooManyPunctures(n_punctures));
        }
        let mut occ: BTreeMap<ArcId, Vec<Slot>> = BTreeMap::new();
        for (x, c) in crossings.iter().enumerate() {
            for (pos, &a) in c.iter().enumerate() {
                if a == 0 {
                    return Err(DiagramError::ZeroArc);
                }
                occ.entry(a).or_default().push(Slot { crossing: x, pos });
            }
        }
        if let Some((&arc, v)) = occ.iter().find(|(_, v)| v.len() != 2) {
            return Err(DiagramError::OpenDiagram { arc, count: v.len() });
        }
        let mut rays = BTreeMap::new();
        for (&arc, v) in &arc_rays {
            if !occ.contains_key(&arc) {
                return Err(DiagramError::UnknownRayArc(arc));
            }
            if v.len() != n_punctures {
                return Err(DiagramError::RayLength { arc, len: v.len(), expected: n_punctures });
            }
        }
        for &arc in occ.keys() {
            let v = arc_rays.get(&arc).cloned().unwrap_or_else(|| vec![0; n_punctures]);
            rays.insert(arc, v);
        }
        let mut loops = Vec::with_capacity(free_loops.len());
        for (index, l) in free_loops.iter().enumerate() {
            if l.len() != n_punctures {
                return Err(DiagramError::LoopLength { index, len: l.len(), expected: n_punctures });
            }
            if l.iter().any(|&b| b > 1) {
                return Err(DiagramError::LoopEntry { index });
            }
            loops.push(PunctureSet::from_bits(l));
        }

        let ends = orient(&crossings, &occ)?;
        let signs = crossings
            .iter()
            .enumerate()
            .map(|(x, c)| {
                // over strand runs b -> d or d -> b; d -> b is positive
                let b = c[1];
                if ends[&b].tail == (Slot { crossing: x, pos: 1 }) {
                    Sign::Pos
                } else {
                    Sign::Neg
                }
            })
            .collect();

        let d = Diagram { n_punctures, crossings, arc_rays: rays, free_loops: loops, ends, signs };
        d.check_planar()?;
        d.check_rays()?;
        Ok(d)
    }

    /// A diagram whose punctures sit in the given faces (indices into
    /// [`Diagram::faces`] of the unpunctured diagram), with `outer` the face
    /// touching the disk boundary. Requires a connected crossing graph.
    pub fn with_punctures_in_faces(
        crossings: Vec<[ArcId; 4]>,
        outer: usize,
        puncture_faces: &[usize],
        free_loops: Vec<Vec<u8>>,
    ) -> Result<Self, DiagramError> {
        let n = puncture_faces.len();
        let bare = Diagram::new(0, crossings.clone(), BTreeMap::new(), vec![])?;
        let faces = bare.faces();
        let mut rays: BTreeMap<ArcId, Vec<u32>> = bare.arcs().map(|a| (a, vec![0; n])).collect();
        for (i, &f) in puncture_faces.iter().enumerate() {
            for a in faces.dual_path(f, outer) {
                rays.get_mut(&a).unwrap()[i] ^= 1;
            }
        }
        Diagram::new(n, crossings, rays, free_loops)
    }

    pub fn parse(text: &str) -> Result<Self, DiagramError> {
        let file: DiagramFile = serde_json::from_str(text).map_err(|e| DiagramError::Malformed(e.to_string()))?;
        let mut rays = BTreeMap::new();
        for (k, v) in file.arc_rays {
            let arc: ArcId = k
                .trim()
                .parse()
                .map_err(|_| DiagramError::Malformed(format!("arc key {k:?} is not a positive integer")))?;
            rays.insert(arc, v);
        }
        Diagram::new(file.punctures, file.crossings, rays, file.free_loops)
    }

    /// Serializes in the same schema `parse` accepts; zero ray vectors are omitted.
    pub fn to_json(&self) -> String {
        fn line<T: Serialize>(v: &T) -> String {
            serde_json::to_string(v).expect("plain data")
        }
        let rays: BTreeMap<ArcId, &Vec<u32>> =
            self.arc_rays.iter().filter(|(_, v)| v.iter().any(|&k| k != 0)).map(|(a, v)| (*a, v)).collect();
        let loops: Vec<Vec<u8>> = self.free_loops.iter().map(|l| l.to_bits(self.n_punctures)).collect();
        let mut fields = vec![
            format!("  \"punctures\": {}", self.n_punctures),
            format!("  \"crossings\": {}", line(&self.crossings)),
        ];
        if !rays.is_empty() {
            fields.push(format!("  \"arc_rays\": {}", line(&rays)));
        }
        if !loops.is_empty() {
            fields.push(format!("  \"free_loops\": {}", line(&loops)));
        }
        format!("{{\n{}\n}}", fields.join(",\n"))
    }

    pub fn n_punctures(&self) -> usize {
        self.n_punctures
    }

    pub fn n_crossings(&self) -> usize {
        self.crossings.len()
    }

    pub fn crossings(&self) -> &[[ArcId; 4]] {
        &self.crossings
    }

    pub fn free_loops(&self) -> &[PunctureSet] {
        &self.free_loops
    }

    pub fn arcs(&self) -> impl Iterator<Item = ArcId> + '_ {
        self.arc_rays.keys().copied()
    }

    pub fn rays(&self, arc: ArcId) -> Option<&[u32]> {
        self.arc_rays.get(&arc).map(|v| v.as_slice())
    }

    /// Punctures whose ray crosses `arc` an odd number of times.
    pub fn ray_parity(&self, arc: ArcId) -> PunctureSet {
        PunctureSet::from_indices(self.arc_rays[&arc].iter().enumerate().filter(|(_, &k)| k % 2 == 1).map(|(i, _)| i))
    }

    /// Tail and head of an arc under the diagram's orientation.
    pub fn arc_ends(&self, arc: ArcId) -> Option<(Slot, Slot)> {
        self.ends.get(&arc).map(|e| (e.tail, e.head))
    }

    pub fn crossing_sign(&self, x: usize) -> Sign {
        self.signs[x]
    }

    pub fn crossing_signs(&self) -> CrossingSigns {
        let n_plus = self.signs.iter().filter(|&&s| s == Sign::Pos).count();
        let n_minus = self.signs.len() - n_plus;
        CrossingSigns { n_plus, n_minus, writhe: n_plus as i64 - n_minus as i64 }
    }

    fn max_arc(&self) -> ArcId {
        self.arc_rays.keys().next_back().copied().unwrap_or(0)
    }

    fn arc_at(&self, s: Slot) -> ArcId {
        self.crossings[s.crossing][s.pos]
    }

    /// Number of connected components of the crossing graph (free loops excluded).
    pub fn crossing_components(&self) -> usize {
        let n = self.crossings.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for e in self.ends.values() {
            let (a, b) = (find(&mut parent, e.tail.crossing), find(&mut parent, e.head.crossing));
            parent[a] = b;
        }
        (0..n).filter(|&x| find(&mut parent, x) == x).count()
    }

    pub fn is_connected(&self) -> bool {
        self.crossing_components() <= 1
    }

    fn check_planar(&self) -> Result<(), DiagramError> {
        let v = self.crossings.len() as i64;
        let e = self.ends.len() as i64;
        let f = self.faces().len() as i64;
        if v - e + f != 2 * self.crossing_components() as i64 {
            return Err(DiagramError::NonPlanar);
        }
        Ok(())
    }

    fn check_rays(&self) -> Result<(), DiagramError> {
        if self.crossings.is_empty() || !self.is_connected() {
            return Ok(());
        }
        let faces = self.faces();
        for i in 0..self.n_punctures {
            if faces.odd_faces(self, i).len() > 2 {
                return Err(DiagramError::InconsistentRays(i + 1));
            }
        }
        Ok(())
    }

    pub fn resolve(&self, state: &[u8]) -> Result<Resolution, DiagramError> {
        if state.len() != self.crossings.len() {
            return Err(DiagramError::StateLength { got: state.len(), expected: self.crossings.len() });
        }
        let bits = state.iter().enumerate().fold(0u64, |m, (i, &s)| m | ((s as u64 & 1) << i));
        Ok(self.resolve_bits(bits))
    }

    /// Resolution for a vertex encoded as a bitmask (bit `i` = crossing `i`).
    pub fn resolve_bits(&self, state: u64) -> Resolution {
        let partner = |s: Slot| -> Slot {
            let one = state >> s.crossing & 1 == 1;
            // 0-smoothing joins a-b and c-d; 1-smoothing joins a-d and b-c
            let pos = match (one, s.pos) {
                (false, 0) => 1,
                (false, 1) => 0,
                (false, 2) => 3,
                (false, 3) => 2,
                (true, 0) => 3,
                (true, 3) => 0,
                (true, 1) => 2,
                (true, 2) => 1,
                _ => unreachable!(),
            };
            Slot { crossing: s.crossing, pos }
        };

        let mut arc_circle: BTreeMap<ArcId, usize> = BTreeMap::new();
        let mut circles = Vec::new();
        for &start in self.ends.keys() {
            if arc_circle.contains_key(&start) {
                continue;
            }
            let idx = circles.len();
            let mut segments = Vec::new();
            let mut enclosure = PunctureSet::EMPTY;
            let mut arc = start;
            let mut forward = true;
            loop {
                arc_circle.insert(arc, idx);
                segments.push((arc, forward));
                enclosure = enclosure.xor(self.ray_parity(arc));
                let e = self.ends[&arc];
                let arrive = if forward { e.head } else { e.tail };
                let leave = partner(arrive);
                let next = self.arc_at(leave);
                let ne = self.ends[&next];
                forward = ne.tail == leave;
                arc = next;
                if arc == start {
                    break;
                }
            }
            circles.push(Circle { segments, enclosure });
        }
        // traced in increasing order of smallest arc already
        for l in &self.free_loops {
            circles.push(Circle { segments: vec![], enclosure: *l });
        }
        Resolution { state, circles, arc_circle }
    }

    /// Faces of the crossing graph, traced with each face on the right of its darts.
    pub fn faces(&self) -> Faces {
        let mut side_face: HashMap<(ArcId, bool), usize> = HashMap::new();
        let mut faces = Vec::new();
        for &a in self.ends.keys() {
            for dir in [true, false] {
                if side_face.contains_key(&(a, dir)) {
                    continue;
                }
                let idx = faces.len();
                let mut darts = Vec::new();
                let (mut arc, mut fwd) = (a, dir);
                loop {
                    side_face.insert((arc, fwd), idx);
                    darts.push((arc, fwd));
                    let e = self.ends[&arc];
                    let arrive = if fwd { e.head } else { e.tail };
                    let leave = Slot { crossing: arrive.crossing, pos: (arrive.pos + 1) % 4 };
                    let next = self.arc_at(leave);
                    fwd = self.ends[&next].tail == leave;
                    arc = next;
                    if (arc, fwd) == (a, dir) {
                        break;
                    }
                }
                faces.push(darts);
            }
        }
        Faces { faces, side_face }
    }

    /// Applies a Reidemeister I move, adding a kink of the given sign at the
    /// end of `target`. The kink encloses no puncture.
    pub fn apply_r1(&self, target: Strand, chirality: Sign) -> Result<Diagram, DiagramError> {
        let mut crossings = self.crossings.clone();
        let mut rays = self.arc_rays.clone();
        let mut loops: Vec<Vec<u8>> = self.free_loops.iter().map(|l| l.to_bits(self.n_punctures)).collect();
        let zero = vec![0u32; self.n_punctures];
        let next = self.max_arc();
        let kink = |e_in: ArcId, e_out: ArcId, l: ArcId| match chirality {
            Sign::Pos => [e_in, e_out, l, l],
            Sign::Neg => [l, e_in, e_out, l],
        };
        match target {
            Strand::Arc(e) => {
                let ends = *self.ends.get(&e).ok_or(DiagramError::UnknownArc(e))?;
                let (l, e_out) = (next + 1, next + 2);
                crossings[ends.head.crossing][ends.head.pos] = e_out;
                crossings.push(kink(e, e_out, l));
                rays.insert(l, zero.clone());
                rays.insert(e_out, zero);
            }
            Strand::Loop(i) => {
                if i >= loops.len() {
                    return Err(DiagramError::UnknownLoop(i));
                }
                let enc = self.free_loops[i];
                loops.remove(i);
                let (m, l) = (next + 1, next + 2);
                crossings.push(kink(m, m, l));
                rays.insert(m, enc.to_bits(self.n_punctures).into_iter().map(u32::from).collect());
                rays.insert(l, zero);
            }
        }
        Diagram::new(self.n_punctures, crossings, rays, loops)
    }

    /// Applies a Reidemeister II move pushing a finger of `over` across `under`.
    ///
    /// For two arcs, they must lie on a common face; the finger runs through
    /// that face and creates a puncture-free bigon. For two free loops, the
    /// loops are taken side by side when their enclosures are disjoint and
    /// nested when one contains the other.
    pub fn apply_r2(&self, over: Strand, under: Strand) -> Result<Diagram, DiagramError> {
        match (over, under) {
            (Strand::Loop(i), Strand::Loop(j)) => self.r2_loops(i, j),
            (Strand::Arc(a), Strand::Arc(b)) => self.r2_arcs(a, b),
            _ => Err(DiagramError::NotApplicable {
                target: format!("{over} / {under}"),
                reason: "R2 between an arc and a free loop is not supported".into(),
            }),
        }
    }

    fn r2_loops(&self, i: usize, j: usize) -> Result<Diagram, DiagramError> {
        let n = self.free_loops.len();
        for k in [i, j] {
            if k >= n {
                return Err(DiagramError::UnknownLoop(k));
            }
        }
        if i == j {
            return Err(DiagramError::NotApplicable {
                target: Strand::Loop(i).to_string(),
                reason: "a loop cannot pass over itself".into(),
            });
        }
        let (ea, eb) = (self.free_loops[i], self.free_loops[j]);
        let np = self.n_punctures;
        let bits = |s: PunctureSet| -> Vec<u32> { s.to_bits(np).into_iter().map(u32::from).collect() };
        let next = self.max_arc();
        let (a_out, a_in, b_out, b_in) = (next + 1, next + 2, next + 3, next + 4);
        // rays on (a_out, a_in, b_out, b_in)
        let r = if ea.intersect(eb).is_empty() {
            [ea, PunctureSet::EMPTY, eb, PunctureSet::EMPTY]
        } else if ea.is_subset(&eb) {
            // a nested inside b, pushed outward
            [PunctureSet::EMPTY, ea, eb, PunctureSet::EMPTY]
        } else if eb.is_subset(&ea) {
            [ea, PunctureSet::EMPTY, PunctureSet::EMPTY, eb]
        } else {
            return Err(DiagramError::NotApplicable {
                target: format!("{} / {}", Strand::Loop(i), Strand::Loop(j)),
                reason: "loops with crossing enclosures cannot be disjoint".into(),
            });
        };
        let mut crossings = self.crossings.clone();
        crossings.push([b_out, a_out, b_in, a_in]);
        crossings.push([b_in, a_out, b_out, a_in]);
        let mut rays = self.arc_rays.clone();
        for (arc, s) in [a_out, a_in, b_out, b_in].into_iter().zip(r) {
            rays.insert(arc, bits(s));
        }
        let loops =
            self.free_loops.iter().enumerate().filter(|&(k, _)| k != i && k != j).map(|(_, l)| l.to_bits(np)).collect();
        Diagram::new(np, crossings, rays, loops)
    }

    fn r2_arcs(&self, a1: ArcId, a2: ArcId) -> Result<Diagram, DiagramError> {
        for a in [a1, a2] {
            if !self.ends.contains_key(&a) {
                return Err(DiagramError::UnknownArc(a));
            }
        }
        let na =
            |reason: &str| DiagramError::NotApplicable { target: format!("arcs {a1} and {a2}"), reason: reason.into() };
        if a1 == a2 {
            return Err(na("an arc cannot pass over itself"));
        }
        if !self.is_connected() {
            return Err(na("R2 on arcs requires a connected crossing graph"));
        }
        let faces = self.faces();
        let (face, fwd1, fwd2) = faces
            .faces
            .iter()
            .enumerate()
            .find_map(|(fi, darts)| {
                let d1 = darts.iter().find(|d| d.0 == a1)?;
                let d2 = darts.iter().find(|d| d.0 == a2)?;
                Some((fi, d1.1, d2.1))
            })
            .ok_or_else(|| na("the arcs share no face"))?;

        let e1 = self.ends[&a1];
        let e2 = self.ends[&a2];
        let end1 = if fwd1 { e1.head } else { e1.tail };
        let end2 = if fwd2 { e2.head } else { e2.tail };
        let next = self.max_arc();
        // pieces along dart direction: a1 = p1, tip, p3; a2 = q1, mid, q3
        let (p1, tip, p3) = (a1, next + 1, next + 2);
        let (q1, mid, q3) = (a2, next + 3, next + 4);
        let mut crossings = self.crossings.clone();
        crossings[end1.crossing][end1.pos] = p3;
        crossings[end2.crossing][end2.pos] = q3;
        let c1 = if fwd2 { [mid, p1, q3, tip] } else { [q3, tip, mid, p1] };
        let c2 = if fwd2 { [q1, p3, mid, tip] } else { [mid, tip, q1, p3] };
        crossings.push(c1);
        crossings.push(c2);

        self.transport_rays(crossings, |fi| if fi == face { (q1, fwd2) } else { faces.faces[fi][0] })
    }

    /// Builds the diagram with the given crossings after a local change,
    /// placing every puncture in the new face named by `witness` applied to
    /// the old face that held it. `witness(f)` is a dart of the new diagram
    /// lying in the region that continues old face `f`.
    pub fn transport_rays(
        &self,
        crossings: Vec<[ArcId; 4]>,
        witness: impl Fn(usize) -> (ArcId, bool),
    ) -> Result<Diagram, DiagramError> {
        let faces = self.faces();
        let provisional = Diagram::new(0, crossings.clone(), BTreeMap::new(), vec![])?;
        let new_faces = provisional.faces();
        let mut rays: BTreeMap<ArcId, Vec<u32>> = provisional.arcs().map(|a| (a, vec![0; self.n_punctures])).collect();
        for i in 0..self.n_punctures {
            let odd = faces.odd_faces(self, i);
            if odd.len() == 2 {
                let side = |f: usize| {
                    let w = witness(f);
                    new_faces.side_face.get(&w).copied().ok_or(DiagramError::UnknownArc(w.0))
                };
                for a in new_faces.dual_path(side(odd[0])?, side(odd[1])?) {
                    rays.get_mut(&a).unwrap()[i] ^= 1;
                }
            }
        }
        let loops = self.free_loops.iter().map(|l| l.to_bits(self.n_punctures)).collect();
        Diagram::new(self.n_punctures, crossings, rays, loops)
    }

    /// Drops all punctures except those in `keep` (zero-based), preserving their order.
    pub fn restrict_punctures(&self, keep: &[usize]) -> Result<Diagram, DiagramError> {
        for &k in keep {
            if k >= self.n_punctures {
                return Err(DiagramError::Malformed(format!("puncture {} out of range", k + 1)));
            }
        }
        let rays = self.arc_rays.iter().map(|(&a, v)| (a, keep.iter().map(|&k| v[k]).collect())).collect();
        let loops = self.free_loops.iter().map(|l| keep.iter().map(|&k| l.contains(k) as u8).collect()).collect();
        Diagram::new(keep.len(), self.crossings.clone(), rays, loops)
    }
}

fn orient(
    crossings: &[[ArcId; 4]],
    occ: &BTreeMap<ArcId, Vec<Slot>>,
) -> Result<BTreeMap<ArcId, ArcEnds>, DiagramError> {
    let other = |arc: ArcId, s: Slot| -> Slot {
        let v = &occ[&arc];
        if v[0] == s {
            v[1]
        } else {
            v[0]
        }
    };
    let mut ends = BTreeMap::new();
    let mut seen: BTreeSet<ArcId> = BTreeSet::new();
    for (&start, v) in occ {
        if seen.contains(&start) {
            continue;
        }
        // walk the strand: (arc, end we leave from, end we arrive at)
        let mut walk: Vec<(ArcId, Slot, Slot)> = Vec::new();
        let from = v[0];
        let mut arc = start;
        let mut leave = from;
        loop {
            let arrive = other(arc, leave);
            walk.push((arc, leave, arrive));
            seen.insert(arc);
            let next_leave = Slot { crossing: arrive.crossing, pos: opposite(arrive.pos) };
            let next = crossings[next_leave.crossing][next_leave.pos];
            if next == start && next_leave == from {
                break;
            }
            arc = next;
            leave = next_leave;
        }
        let mut forward = None;
        for &(arc, _, arrive) in &walk {
            let dir = match arrive.pos {
                0 => Some(true),
                2 => Some(false),
                _ => None,
            };
            if let Some(d) = dir {
                match forward {
                    None => forward = Some(d),
                    Some(f) if f != d => return Err(DiagramError::Orientation(arc)),
                    _ => {}
                }
            }
        }
        // a strand that is never under can be oriented either way without
        // changing n_+ or n_-; use the walk direction
        let forward = forward.unwrap_or(true);
        for (arc, leave, arrive) in walk {
            let e = if forward { ArcEnds { tail: leave, head: arrive } } else { ArcEnds { tail: arrive, head: leave } };
            ends.insert(arc, e);
        }
    }
    Ok(ends)
}

/// One resolved circle: its arcs in cyclic order (with traversal direction
/// relative to the arc orientation) and the punctures it encloses.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Circle {
    pub segments: Vec<(ArcId, bool)>,
    pub enclosure: PunctureSet,
}

impl Circle {
    pub fn is_trivial(&self) -> bool {
        self.enclosure.is_empty()
    }

    pub fn min_arc(&self) -> Option<ArcId> {
        self.segments.iter().map(|s| s.0).min()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Resolution {
    pub state: u64,
    pub circles: Vec<Circle>,
    arc_circle: BTreeMap<ArcId, usize>,
}

impl Resolution {
    pub fn circle_of(&self, arc: ArcId) -> usize {
        self.arc_circle[&arc]
    }

    pub fn len(&self) -> usize {
        self.circles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.circles.is_empty()
    }
}

/// Faces of a diagram's crossing graph on the sphere. A dart `(arc, true)`
/// runs along the arc's orientation; every face lies to the right of its darts.
#[derive(Clone, Debug)]
pub struct Faces {
    pub faces: Vec<Vec<(ArcId, bool)>>,
    pub side_face: HashMap<(ArcId, bool), usize>,
}

impl Faces {
    pub fn len(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    /// Arcs crossed by a shortest dual path from face `from` to face `to`.
    pub fn dual_path(&self, from: usize, to: usize) -> Vec<ArcId> {
        let mut prev: HashMap<usize, (usize, ArcId)> = HashMap::new();
        let mut queue = VecDeque::from([from]);
        let mut seen = BTreeSet::from([from]);
        while let Some(f) = queue.pop_front() {
            if f == to {
                break;
            }
            for &(arc, dir) in &self.faces[f] {
                let g = self.side_face[&(arc, !dir)];
                if seen.insert(g) {
                    prev.insert(g, (f, arc));
                    queue.push_back(g);
                }
            }
        }
        let mut path = Vec::new();
        let mut f = to;
        while f != from {
            let (p, arc) = prev[&f];
            path.push(arc);
            f = p;
        }
        path
    }

    /// Faces whose boundary meets puncture `i`'s ray an odd number of times:
    /// the face holding the puncture and the face at the disk boundary, or
    /// nothing when the two coincide.
    pub fn odd_faces(&self, d: &Diagram, i: usize) -> Vec<usize> {
        self.faces
            .iter()
            .enumerate()
            .filter(|(_, darts)| darts.iter().map(|(a, _)| d.arc_rays[a][i]).sum::<u32>() % 2 == 1)
            .map(|(f, _)| f)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn hopf() -> Diagram {
        Diagram::parse(r#"{"punctures":0,"crossings":[[4,1,3,2],[2,3,1,4]]}"#).unwrap()
    }

    #[test]
    fn unknot_free_loop() {
        let d = Diagram::parse(r#"{"punctures":0,"crossings":[],"free_loops":[[]]}"#).unwrap();
        assert_eq!(d.n_crossings(), 0);
        assert_eq!(d.free_loops().len(), 1);
        let signs = d.crossing_signs();
        assert_eq!((signs.n_plus, signs.n_minus, signs.writhe), (0, 0, 0));
        assert_eq!(d.resolve(&[]).unwrap().len(), 1);
    }

    #[test]
    fn open_diagram_rejected() {
        let err = Diagram::parse(r#"{"punctures":0,"crossings":[[1,2,3,4],[1,2,4,5]]}"#).unwrap_err();
        assert!(matches!(err, DiagramError::OpenDiagram { arc: 3, count: 1 }), "{err}");
        assert!(err.to_string().contains("open diagram"));
    }

    #[test]
    fn bad_ray_length_rejected() {
        let err =
            Diagram::parse(r#"{"punctures":2,"crossings":[[4,1,3,2],[2,3,1,4]],"arc_rays":{"1":[1]}}"#).unwrap_err();
        assert!(matches!(err, DiagramError::RayLength { arc: 1, len: 1, expected: 2 }));
        assert!(matches!(Diagram::parse("{"), Err(DiagramError::Malformed(_))));
        assert!(matches!(
            Diagram::parse(r#"{"punctures":1,"crossings":[],"free_loops":[[2]]}"#),
            Err(DiagramError::LoopEntry { index: 0 })
        ));
    }

    #[test]
    fn hopf_signs_and_cube_shape() {
        let d = hopf();
        let s = d.crossing_signs();
        assert_eq!((s.n_plus, s.n_minus, s.writhe), (0, 2, -2));
        let counts: Vec<usize> = (0..4).map(|v| d.resolve_bits(v).len()).collect();
        assert_eq!(counts, vec![2, 1, 1, 2]);
        assert_eq!(d.resolve(&[0, 1]).unwrap().len(), 1);
        assert_eq!(d.resolve(&[1, 1]).unwrap().len(), 2);
        assert!(matches!(d.resolve(&[0]), Err(DiagramError::StateLength { .. })));
        assert_eq!(d.resolve(&[1, 0]).unwrap(), d.resolve(&[1, 0]).unwrap());
    }

    #[test]
    fn mirror_hopf_is_positive() {
        // swap over/under at both crossings: rotate each tuple by one slot
        let d = Diagram::parse(r#"{"punctures":0,"crossings":[[1,3,2,4],[3,1,4,2]]}"#).unwrap();
        let s = d.crossing_signs();
        assert_eq!((s.n_plus, s.n_minus, s.writhe), (2, 0, 2));
    }

    #[test]
    fn hopf_faces_are_four_bigons() {
        let f = hopf().faces();
        assert_eq!(f.len(), 4);
        assert!(f.faces.iter().all(|face| face.len() == 2));
    }

    #[test]
    fn json_round_trip() {
        let d = Diagram::parse(
            r#"{"punctures":2,"crossings":[[4,1,3,2],[2,3,1,4]],"arc_rays":{"1":[1,0],"3":[0,1]},"free_loops":[[1,0]]}"#,
        )
        .unwrap();
        assert_eq!(Diagram::parse(&d.to_json()).unwrap(), d);
    }

    #[test]
    fn inconsistent_rays_rejected() {
        // arcs 1 and 2 together touch all four faces of the Hopf diagram an odd
        // number of times, which no single ray can do
        let ok = Diagram::parse(r#"{"punctures":1,"crossings":[[4,1,3,2],[2,3,1,4]],"arc_rays":{"1":[1]}}"#);
        assert!(ok.is_ok());
        let bad = Diagram::parse(r#"{"punctures":1,"crossings":[[4,1,3,2],[2,3,1,4]],"arc_rays":{"1":[1],"2":[1]}}"#);
        assert!(matches!(bad, Err(DiagramError::InconsistentRays(1))));
    }

    #[test]
    fn r1_changes_writhe_by_chirality() {
        let d = hopf();
        for a in d.arcs().collect::<Vec<_>>() {
            for s in [Sign::Pos, Sign::Neg] {
                let e = d.apply_r1(Strand::Arc(a), s).unwrap();
                assert_eq!(e.n_crossings(), 3);
                assert_eq!(e.crossing_signs().writhe, -2 + s.value());
            }
        }
        let u = Diagram::parse(r#"{"punctures":0,"crossings":[],"free_loops":[[]]}"#).unwrap();
        let k = u.apply_r1(Strand::Loop(0), Sign::Pos).unwrap();
        assert_eq!(k.n_crossings(), 1);
        assert_eq!(k.crossing_signs().writhe, 1);
        assert!(k.free_loops().is_empty());
        assert!(matches!(d.apply_r1(Strand::Arc(99), Sign::Pos), Err(DiagramError::UnknownArc(99))));
    }

    #[test]
    fn r2_adds_opposite_crossings() {
        let d = hopf();
        let e = d.apply_r2(Strand::Arc(1), Strand::Arc(3)).unwrap();
        assert_eq!(e.n_crossings(), 4);
        let s = e.crossing_signs();
        assert_eq!((s.n_plus, s.n_minus), (1, 3));

        let two = Diagram::parse(r#"{"punctures":0,"crossings":[],"free_loops":[[],[]]}"#).unwrap();
        let r = two.apply_r2(Strand::Loop(0), Strand::Loop(1)).unwrap();
        assert_eq!(r.n_crossings(), 2);
        assert_eq!(r.crossing_signs().writhe, 0);
    }

    #[test]
    fn merge_split_dichotomy_on_hopf() {
        let d = hopf();
        for v in 0..4u64 {
            for i in 0..2 {
                let w = v ^ (1 << i);
                let (a, b) = (d.resolve_bits(v).len() as i64, d.resolve_bits(w).len() as i64);
                assert_eq!((a - b).abs(), 1);
            }
        }
    }

    #[test]
    fn puncture_set_order_is_lexicographic() {
        let a = PunctureSet::from_indices([0]);
        let ab = PunctureSet::from_indices([0, 1]);
        let b = PunctureSet::from_indices([1]);
        assert!(a < ab && ab < b);
        assert_eq!(ab.to_string(), "{1,2}");
    }
}
