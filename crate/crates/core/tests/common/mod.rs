#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use mkh::diagram::{ArcId, Diagram, Sign, Strand};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

pub const FIXTURES: [&str; 5] = ["unknot", "hopf", "hopf_annular", "hopf2", "picture_hanging"];

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn fixture(name: &str) -> Diagram {
    let text = std::fs::read_to_string(fixture_path(&format!("{name}.json"))).unwrap();
    Diagram::parse(&text).unwrap()
}

/// PD code of the closure of a braid word; `(i, true)` is σ_i, `(i, false)` its inverse.
/// Strands that never cross come back as free loops.
pub fn braid_closure(strands: usize, word: &[(usize, bool)]) -> (Vec<[ArcId; 4]>, usize) {
    let mut next = strands as ArcId + 1;
    let mut pos: Vec<ArcId> = (1..=strands as ArcId).collect();
    let mut crossings = Vec::new();
    for &(i, positive) in word {
        let (a, b) = (pos[i], pos[i + 1]);
        let (a2, b2) = (next, next + 1);
        next += 2;
        // a runs bottom-left to top-right, b bottom-right to top-left
        crossings.push(if positive { [b, a2, b2, a] } else { [a, b, a2, b2] });
        pos[i] = b2;
        pos[i + 1] = a2;
    }
    let rename: BTreeMap<ArcId, ArcId> = pos.iter().enumerate().map(|(k, &a)| (a, k as ArcId + 1)).collect();
    for c in crossings.iter_mut() {
        for a in c.iter_mut() {
            if let Some(&r) = rename.get(a) {
                *a = r;
            }
        }
    }
    let mut used: Vec<ArcId> = crossings.iter().flatten().copied().collect();
    used.sort_unstable();
    used.dedup();
    let compact: BTreeMap<ArcId, ArcId> = used.iter().enumerate().map(|(k, &a)| (a, k as ArcId + 1)).collect();
    for c in crossings.iter_mut() {
        for a in c.iter_mut() {
            *a = compact[a];
        }
    }
    // a strand position that is its own cycle and never crosses
    let touched: Vec<bool> = (0..strands).map(|s| word.iter().any(|&(i, _)| i == s || i + 1 == s)).collect();
    let loops = touched.iter().filter(|t| !**t).count();
    (crossings, loops)
}

/// A random diagram: braid closure on at most 3 strands with at most
/// `max_crossings` crossings, a connected crossing graph, punctures in random
/// faces and possibly a free loop.
pub fn random_diagram(rng: &mut StdRng, max_crossings: usize, max_punctures: usize) -> Diagram {
    loop {
        let strands = rng.gen_range(2..=3);
        let len = rng.gen_range(1..=max_crossings);
        let word: Vec<(usize, bool)> = (0..len).map(|_| (rng.gen_range(0..strands - 1), rng.gen_bool(0.5))).collect();
        let (crossings, loops) = braid_closure(strands, &word);
        if loops > 0 {
            continue;
        }
        let Ok(bare) = Diagram::new(0, crossings.clone(), BTreeMap::new(), vec![]) else { continue };
        if !bare.is_connected() {
            continue;
        }
        let nf = bare.faces().len();
        let n = rng.gen_range(0..=max_punctures);
        let outer = rng.gen_range(0..nf);
        let faces: Vec<usize> = (0..n).map(|_| rng.gen_range(0..nf)).collect();
        let mut free = vec![];
        if rng.gen_bool(0.2) {
            let f = rng.gen_range(0..nf);
            free.push((0..n).map(|i| (faces[i] == f && f != outer && rng.gen_bool(0.5)) as u8).collect());
        }
        if let Ok(d) = Diagram::with_punctures_in_faces(crossings, outer, &faces, free) {
            return d;
        }
    }
}

/// One random R1 or R2 move that applies to `d`.
pub fn random_move(rng: &mut StdRng, d: &Diagram) -> Diagram {
    let arcs: Vec<ArcId> = d.arcs().collect();
    let nl = d.free_loops().len();
    loop {
        let r = if rng.gen_bool(0.5) {
            let target = if arcs.is_empty() || (nl > 0 && rng.gen_bool(0.3)) {
                Strand::Loop(rng.gen_range(0..nl))
            } else {
                Strand::Arc(*arcs.choose(rng).unwrap())
            };
            let s = if rng.gen_bool(0.5) { Sign::Pos } else { Sign::Neg };
            d.apply_r1(target, s)
        } else if nl >= 2 && (arcs.is_empty() || rng.gen_bool(0.3)) {
            let i = rng.gen_range(0..nl);
            let j = rng.gen_range(0..nl);
            d.apply_r2(Strand::Loop(i), Strand::Loop(j))
        } else if !arcs.is_empty() {
            let faces = d.faces();
            let face = faces.faces.choose(rng).unwrap();
            let a = face.choose(rng).unwrap().0;
            let b = face.choose(rng).unwrap().0;
            d.apply_r2(Strand::Arc(a), Strand::Arc(b))
        } else {
            continue;
        };
        if let Ok(e) = r {
            return e;
        }
    }
}

pub fn random_moves(rng: &mut StdRng, d: &Diagram, k: usize) -> Diagram {
    let mut d = d.clone();
    for _ in 0..k {
        d = random_move(rng, &d);
    }
    d
}

/// Every Reidemeister III move applicable at a puncture-free triangle face.
///
/// The three triangle sides belong to strands A, B, C matched to the lines
/// y = 0, x + y = 1 and x = 0; the move translates B to x + y = -1.
pub fn r3_moves(d: &Diagram) -> Vec<Diagram> {
    let faces = d.faces();
    let blocked: Vec<usize> = (0..d.n_punctures()).flat_map(|i| faces.odd_faces(d, i)).collect();
    let mut out = Vec::new();
    for (t, darts) in faces.faces.iter().enumerate() {
        if darts.len() != 3 || blocked.contains(&t) {
            continue;
        }
        let sides: Vec<ArcId> = darts.iter().map(|x| x.0).collect();
        if sides[0] == sides[1] || sides[1] == sides[2] || sides[0] == sides[2] {
            continue;
        }
        for perm in [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
            if let Some(e) = r3_at(d, &faces, t, [sides[perm[0]], sides[perm[1]], sides[perm[2]]]) {
                out.push(e);
            }
        }
    }
    out
}

fn r3_at(d: &Diagram, faces: &mkh::diagram::Faces, t: usize, [sa, sb, sc]: [ArcId; 3]) -> Option<Diagram> {
    let ends = |a: ArcId| {
        let (t, h) = d.arc_ends(a).unwrap();
        [t, h]
    };
    let common = |p: ArcId, q: ArcId| -> Option<usize> {
        let cp: Vec<usize> = ends(p).iter().map(|s| s.crossing).collect();
        ends(q).iter().map(|s| s.crossing).find(|c| cp.contains(c))
    };
    let (x, y, z) = (common(sa, sc)?, common(sa, sb)?, common(sb, sc)?);
    if x == y || y == z || x == z {
        return None;
    }
    let slot = |a: ArcId, c: usize| ends(a).iter().find(|s| s.crossing == c).unwrap().pos;
    let (ax, cx, ay, by, bz, cz) = (slot(sa, x), slot(sc, x), slot(sa, y), slot(sb, y), slot(sb, z), slot(sc, z));
    if cx != (ax + 1) % 4 || by != (ay + 3) % 4 || bz != (cz + 1) % 4 {
        return None;
    }
    let a_over_c = ax % 2 == 1;
    let a_over_b = ay % 2 == 1;
    let b_over_c = bz % 2 == 1;
    let top_x = if a_over_c { 'A' } else { 'C' };
    let top_y = if a_over_b { 'A' } else { 'B' };
    let top_z = if b_over_c { 'B' } else { 'C' };
    if (top_x, top_y, top_z) == ('A', 'B', 'C') || (top_x, top_y, top_z) == ('C', 'A', 'B') {
        return None;
    }
    let cr = d.crossings();
    let opp = |c: usize, s: usize| cr[c][(s + 2) % 4];
    let (ext_ax, ext_cx, ext_ay, ext_by, ext_bz, ext_cz) =
        (opp(x, ax), opp(x, cx), opp(y, ay), opp(y, by), opp(z, bz), opp(z, cz));
    let tail = |a: ArcId| d.arc_ends(a).unwrap().0.crossing;
    let va: (i64, i64) = if tail(sa) == x { (1, 0) } else { (-1, 0) };
    let vb: (i64, i64) = if tail(sb) == y { (-1, 1) } else { (1, -1) };
    let vc: (i64, i64) = if tail(sc) == z { (0, -1) } else { (0, 1) };

    // arms: (angle in degrees, direction, arc, strand velocity)
    type Arm = (i64, (i64, i64), ArcId, (i64, i64));
    let pd = |arms: [Arm; 4], under: [usize; 2]| -> [ArcId; 4] {
        let dot = |p: (i64, i64), q: (i64, i64)| p.0 * q.0 + p.1 * q.1;
        let inc = *under.iter().find(|&&k| dot(arms[k].1, arms[k].3) < 0).unwrap();
        let mut order: Vec<&Arm> = arms.iter().collect();
        order.sort_by_key(|a| (a.0 - arms[inc].0).rem_euclid(360));
        [order[0].2, order[1].2, order[2].2, order[3].2]
    };
    let new_x = pd(
        [(180, (-1, 0), sa, va), (0, (1, 0), ext_ay, va), (270, (0, -1), sc, vc), (90, (0, 1), ext_cz, vc)],
        if a_over_c { [2, 3] } else { [0, 1] },
    );
    let new_y = pd(
        [(180, (-1, 0), ext_ax, va), (0, (1, 0), sa, va), (135, (-1, 1), ext_bz, vb), (315, (1, -1), sb, vb)],
        if a_over_b { [2, 3] } else { [0, 1] },
    );
    let new_z = pd(
        [(135, (-1, 1), sb, vb), (315, (1, -1), ext_by, vb), (90, (0, 1), sc, vc), (270, (0, -1), ext_cx, vc)],
        if b_over_c { [2, 3] } else { [0, 1] },
    );
    let mut crossings = cr.to_vec();
    crossings[x] = new_x;
    crossings[y] = new_y;
    crossings[z] = new_z;
    let internal = [sa, sb, sc];
    let witness = |f: usize| -> (ArcId, bool) {
        *faces.faces[f].iter().find(|dart| !internal.contains(&dart.0)).expect("external dart")
    };
    let _ = t;
    d.transport_rays(crossings, witness).ok()
}
