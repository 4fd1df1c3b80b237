//! Sketch files on disk.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use scsc_core::graph::{Graph, RealizationSet};
use scsc_core::oracle::{assign_ranks, build_sketches, ReachSketch};
use scsc_core::rng;

/// Rank seed derived from the experiment seed, so ranks and realizations use unrelated streams.
pub fn rank_seed(seed: u64) -> u64 {
    rng::mix64(seed ^ 0x5241_4E4B)
}

pub enum SketchSource<'a> {
    Build { graph: &'a Graph, realizations: &'a RealizationSet, rank_seed: u64, k: usize },
    Load,
}

/// Builds and writes a sketch to `path`, or loads one from it.
pub fn sketch_cache(path: &Path, source: SketchSource<'_>) -> Result<ReachSketch> {
    match source {
        SketchSource::Build { graph, realizations, rank_seed, k } => {
            let ranks = assign_ranks(graph.num_vertices(), realizations.num_instances(), rank_seed);
            let sketch = build_sketches(graph, realizations, &ranks, k)?;
            write_atomic(path, &sketch)?;
            Ok(sketch)
        }
        SketchSource::Load => {
            let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
            ReachSketch::read_from(BufReader::new(file)).with_context(|| format!("loading {}", path.display()))
        }
    }
}

fn write_atomic(path: &Path, sketch: &ReachSketch) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut out = BufWriter::new(File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?);
        sketch.write_to(&mut out)?;
        out.flush()?;
    }
    std::fs::rename(&tmp, path).with_context(|| format!("renaming to {}", path.display()))?;
    Ok(())
}

/// Hash of the edge list, edge probabilities, and realization seed. Part of the cache file name, since
/// the sketch file itself records only the rank parameters.
pub fn fingerprint(graph: &Graph, realizations: &RealizationSet) -> u64 {
    let mut h = rng::mix64(graph.num_vertices() as u64 ^ realizations.seed().rotate_left(17));
    for ((u, v), p) in graph.edges().zip(graph.probs()) {
        h = rng::mix64(h ^ rng::keyed(u as u64, v as u64, p.to_bits(), 0));
    }
    h
}

pub fn cache_path(dir: &Path, graph: &Graph, realizations: &RealizationSet, k: usize, rank_seed: u64) -> PathBuf {
    dir.join(format!(
        "sketch-n{}-N{}-k{k}-r{rank_seed:016x}-g{:016x}.bin",
        graph.num_vertices(),
        realizations.num_instances(),
        fingerprint(graph, realizations)
    ))
}

/// Loads the matching cached sketch from `dir` if present, otherwise builds (and caches) it.
pub fn cached_sketch(
    dir: Option<&Path>,
    graph: &Graph,
    realizations: &RealizationSet,
    rank_seed: u64,
    k: usize,
) -> Result<ReachSketch> {
    let build = SketchSource::Build { graph, realizations, rank_seed, k };
    let Some(dir) = dir else {
        let ranks = assign_ranks(graph.num_vertices(), realizations.num_instances(), rank_seed);
        return Ok(build_sketches(graph, realizations, &ranks, k)?);
    };
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = cache_path(dir, graph, realizations, k, rank_seed);
    if !path.exists() {
        return sketch_cache(&path, build);
    }
    let s = sketch_cache(&path, SketchSource::Load)?;
    if s.num_vertices() != graph.num_vertices()
        || s.num_instances() != realizations.num_instances()
        || s.k() != k
        || s.seed() != rank_seed
    {
        bail!("cached sketch {} does not match the requested parameters", path.display());
    }
    Ok(s)
}
