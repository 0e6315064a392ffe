//! MARS extraction by enumeration over one representative full tile.
//!
//! A point of a tile is *flow-out* when some iteration reading it lies in
//! another tile. Its consumer signature is the set of tile offsets of those
//! readers. Grouping the flow-out points by identical signature gives the
//! output MARS: every consumer that reads one point of a group reads all of
//! it, and no point is stored twice.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;

use crate::error::Result;
use crate::kernel::{IVec, Kernel, Point, TileCoord, TilingScheme};

/// Sorted set of non-zero tile offsets `consumer - producer`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct ConsumerSignature(pub Vec<TileCoord>);

impl ConsumerSignature {
    pub fn contains(&self, offset: &TileCoord) -> bool {
        self.0.binary_search(offset).is_ok()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &TileCoord> {
        self.0.iter()
    }
}

/// Maximal atomic irredundant set: points relative to the producing tile's origin.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Mars {
    pub id: usize,
    pub points: Vec<Point>,
    pub signature: ConsumerSignature,
}

impl Mars {
    pub fn size_words(&self) -> usize {
        self.points.len()
    }
}

/// One input MARS of a tile: output MARS `mars_id` of the tile at `producer_offset`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct InputRef {
    pub producer_offset: TileCoord,
    pub mars_id: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TileIOSummary {
    pub outputs: Vec<Mars>,
    pub inputs: Vec<InputRef>,
}

impl TileIOSummary {
    /// Extracts outputs and inputs of the representative tile.
    pub fn analyze(ts: &TilingScheme, k: &Kernel) -> Result<Self> {
        let outputs = extract_output_mars(ts, k)?;
        let inputs = extract_input_map(ts, k, &outputs)?;
        Ok(TileIOSummary { outputs, inputs })
    }

    /// Input MARS grouped by producer offset, each group sorted by MARS id.
    pub fn inputs_by_producer(&self) -> BTreeMap<TileCoord, Vec<usize>> {
        let mut out: BTreeMap<TileCoord, Vec<usize>> = BTreeMap::new();
        for r in &self.inputs {
            out.entry(r.producer_offset.clone()).or_default().push(r.mars_id);
        }
        for ids in out.values_mut() {
            ids.sort_unstable();
        }
        out
    }

    pub fn flow_in_words(&self) -> usize {
        self.inputs.iter().map(|r| self.outputs[r.mars_id].size_words()).sum()
    }

    pub fn flow_out_words(&self) -> usize {
        self.outputs.iter().map(Mars::size_words).sum()
    }
}

/// Offsets of the tiles reading `p`, relative to the tile of `p`; `None`
/// when every reader is in the same tile.
pub fn consumer_signature(p: &Point, ts: &TilingScheme, k: &Kernel) -> Result<Option<ConsumerSignature>> {
    let home = ts.tile_of(p)?;
    let mut offsets = BTreeSet::new();
    for d in &k.deps {
        let consumer = ts.tile_of(&(p + &d.0))?;
        if consumer != home {
            offsets.insert(&consumer - &home);
        }
    }
    Ok((!offsets.is_empty()).then(|| ConsumerSignature(offsets.into_iter().collect())))
}

/// Groups `(point, signature)` pairs into MARS ordered by their smallest point.
pub fn group_by_signature(points: impl IntoIterator<Item = (Point, Option<ConsumerSignature>)>) -> Vec<Mars> {
    let mut groups: HashMap<ConsumerSignature, Vec<Point>> = HashMap::new();
    for (p, sig) in points {
        if let Some(sig) = sig {
            groups.entry(sig).or_default().push(p);
        }
    }
    let mut mars: Vec<Mars> = groups
        .into_iter()
        .map(|(signature, mut points)| {
            points.sort();
            Mars {
                id: 0,
                points,
                signature,
            }
        })
        .collect();
    mars.sort_by(|a, b| a.points[0].cmp(&b.points[0]));
    for (id, m) in mars.iter_mut().enumerate() {
        m.id = id;
    }
    mars
}

/// Output MARS of the origin tile.
pub fn extract_output_mars(ts: &TilingScheme, k: &Kernel) -> Result<Vec<Mars>> {
    extract_output_mars_at(ts, k, &IVec::zeros(ts.dim()))
}

/// Output MARS of tile `tc`, with points shifted back to the origin tile.
pub fn extract_output_mars_at(ts: &TilingScheme, k: &Kernel, tc: &TileCoord) -> Result<Vec<Mars>> {
    let shift = ts.translation(tc)?;
    let mut tagged = Vec::new();
    for p in ts.tile_points(tc)? {
        let sig = consumer_signature(&p, ts, k)?;
        tagged.push((&p - &shift, sig));
    }
    Ok(group_by_signature(tagged))
}

/// Points of the origin tile read by some other tile.
pub fn flow_out(ts: &TilingScheme, k: &Kernel) -> Result<BTreeSet<Point>> {
    let origin = IVec::zeros(ts.dim());
    let mut out = BTreeSet::new();
    for p in ts.tile_points(&origin)? {
        if consumer_signature(&p, ts, k)?.is_some() {
            out.insert(p);
        }
    }
    Ok(out)
}

/// Values read by the origin tile but produced outside it.
pub fn flow_in(ts: &TilingScheme, k: &Kernel) -> Result<BTreeSet<Point>> {
    let origin = IVec::zeros(ts.dim());
    let mut out = BTreeSet::new();
    for p in ts.tile_points(&origin)? {
        for d in &k.deps {
            let q = &p - &d.0;
            if !ts.tile_of(&q)?.is_zero() {
                out.insert(q);
            }
        }
    }
    Ok(out)
}

/// Which producer MARS the origin tile consumes, each listed once.
pub fn extract_input_map(ts: &TilingScheme, k: &Kernel, outputs: &[Mars]) -> Result<Vec<InputRef>> {
    let owner: HashMap<&Point, usize> = outputs
        .iter()
        .flat_map(|m| m.points.iter().map(move |p| (p, m.id)))
        .collect();
    let mut refs = BTreeSet::new();
    for q in flow_in(ts, k)? {
        let producer = ts.tile_of(&q)?;
        let rel = &q - &ts.translation(&producer)?;
        let mars_id = *owner.get(&rel).expect("flow-in value is flow-out of its producer tile");
        refs.insert(InputRef {
            producer_offset: producer,
            mars_id,
        });
    }
    Ok(refs.into_iter().collect())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase", tag = "kind")]
pub enum Violation {
    /// A point belongs to two MARS (outputs) or is fetched twice (inputs).
    Redundant { point: Point },
    /// A flow-out (or flow-in) point not covered by any MARS.
    Missing { point: Point },
    /// A MARS point that is not flow-out (or an input point not flow-in).
    Extra { point: Point },
    /// Consumer `offset` reads only part of MARS `mars_id`, or reads it outside its signature.
    Atomicity {
        mars_id: usize,
        offset: TileCoord,
        read: usize,
        size: usize,
    },
    /// Two MARS with one signature: neither is maximal.
    NotMaximal { first: usize, second: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PartitionReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

/// Checks irredundancy, coverage and atomicity of a summary by enumeration.
pub fn verify_partition(summary: &TileIOSummary, ts: &TilingScheme, k: &Kernel) -> Result<PartitionReport> {
    let mut violations = Vec::new();

    // (a) outputs partition the flow-out set
    let expected_out = flow_out(ts, k)?;
    let mut seen = BTreeSet::new();
    for m in &summary.outputs {
        for p in &m.points {
            if !seen.insert(p.clone()) {
                violations.push(Violation::Redundant { point: p.clone() });
            } else if !expected_out.contains(p) {
                violations.push(Violation::Extra { point: p.clone() });
            }
        }
    }
    for p in expected_out.difference(&seen) {
        violations.push(Violation::Missing { point: p.clone() });
    }

    // (b) inputs partition the flow-in set
    let expected_in = flow_in(ts, k)?;
    let mut fetched = BTreeSet::new();
    for r in &summary.inputs {
        let Some(m) = summary.outputs.get(r.mars_id) else {
            continue;
        };
        let shift = ts.translation(&r.producer_offset)?;
        for p in &m.points {
            let q = p + &shift;
            if !fetched.insert(q.clone()) {
                violations.push(Violation::Redundant { point: q });
            } else if !expected_in.contains(&q) {
                violations.push(Violation::Extra { point: q });
            }
        }
    }
    for q in expected_in.difference(&fetched) {
        violations.push(Violation::Missing { point: q.clone() });
    }

    // (c) atomicity and maximality
    let offsets = ts.inter_tile_offsets(k)?;
    for m in &summary.outputs {
        for c in &offsets {
            let read = m
                .points
                .iter()
                .filter(|p| k.deps.iter().any(|d| ts.tile_of_unchecked(&(*p + &d.0)) == *c))
                .count();
            let want = if m.signature.contains(c) { m.size_words() } else { 0 };
            if read != want {
                violations.push(Violation::Atomicity {
                    mars_id: m.id,
                    offset: c.clone(),
                    read,
                    size: m.size_words(),
                });
            }
        }
    }
    let mut by_sig: HashMap<&ConsumerSignature, usize> = HashMap::new();
    for m in &summary.outputs {
        if let Some(&first) = by_sig.get(&m.signature) {
            violations.push(Violation::NotMaximal { first, second: m.id });
        } else {
            by_sig.insert(&m.signature, m.id);
        }
    }

    Ok(PartitionReport {
        ok: violations.is_empty(),
        violations,
    })
}
