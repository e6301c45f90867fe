//! Grid search over the HSL switching filter parameters, scored by PCD.
//!
//! Each image is corrupted once with a fixed seed; every grid configuration
//! then filters that same noisy image and is scored by the PCD against the
//! clean original. Per-image rankings can be intersected over the best
//! fraction of configurations to find settings that work across images.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::color::hsl_plane;
use crate::error::{Error, Result};
use crate::filters::{switching, vmf_filter, FhsfParams, Norm};
use crate::image::RgbImage;
use crate::metrics::Scielab;
use crate::noise::{inject, NoiseSpec};

/// Inclusive range `lo..=hi` walked in increments of `step`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Range<T> {
    pub lo: T,
    pub hi: T,
    pub step: T,
}

impl<T> Range<T> {
    pub const fn new(lo: T, hi: T, step: T) -> Self {
        Range { lo, hi, step }
    }
}

impl Range<usize> {
    pub fn values(&self) -> Vec<usize> {
        if self.step == 0 || self.lo > self.hi {
            return Vec::new();
        }
        (self.lo..=self.hi).step_by(self.step).collect()
    }
}

impl Range<f64> {
    pub fn values(&self) -> Vec<f64> {
        let walkable =
            self.step > 0.0 && self.lo <= self.hi && self.lo.is_finite() && self.hi.is_finite();
        if !walkable {
            return Vec::new();
        }
        let count = ((self.hi - self.lo) / self.step + 1e-9).floor() as usize + 1;
        (0..count).map(|k| self.lo + k as f64 * self.step).collect()
    }
}

impl<T: FromStr + Copy> FromStr for Range<T> {
    type Err = Error;

    /// Accepts `lo:hi:step`, `lo:hi` (step 1) or a single value.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParams(format!("cannot parse range `{s}`, expected lo:hi:step"));
        let parts: Vec<T> = s
            .split(':')
            .map(|p| p.trim().parse::<T>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        let one: T = "1".parse().map_err(|_| bad())?;
        match parts[..] {
            [v] => Ok(Range::new(v, v, one)),
            [lo, hi] => Ok(Range::new(lo, hi, one)),
            [lo, hi, step] => Ok(Range::new(lo, hi, step)),
            _ => Err(bad()),
        }
    }
}

impl<T: fmt::Display> fmt::Display for Range<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.lo, self.hi, self.step)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParamGrid {
    pub m: Range<usize>,
    pub hue: Range<f64>,
    pub saturation: Range<f64>,
    pub lightness: Range<f64>,
}

impl Default for ParamGrid {
    /// m in [1,8] step 1, Ht in [6,20] step 2, St in [4,16] step 2, Lt in
    /// [32,64] step 4.
    fn default() -> Self {
        ParamGrid {
            m: Range::new(1, 8, 1),
            hue: Range::new(6.0, 20.0, 2.0),
            saturation: Range::new(4.0, 16.0, 2.0),
            lightness: Range::new(32.0, 64.0, 4.0),
        }
    }
}

impl ParamGrid {
    /// A grid holding exactly one configuration.
    pub fn single(p: &FhsfParams) -> Self {
        let t = &p.thresholds;
        ParamGrid {
            m: Range::new(p.m, p.m, 1),
            hue: Range::new(t.hue, t.hue, 1.0),
            saturation: Range::new(t.saturation, t.saturation, 1.0),
            lightness: Range::new(t.lightness, t.lightness, 1.0),
        }
    }

    /// Every configuration, lexicographic in (m, Ht, St, Lt).
    pub fn configs(&self) -> Vec<FhsfParams> {
        let (hs, ss, ls) = (
            self.hue.values(),
            self.saturation.values(),
            self.lightness.values(),
        );
        let mut out = Vec::with_capacity(self.m.values().len() * hs.len() * ss.len() * ls.len());
        for m in self.m.values() {
            for &h in &hs {
                for &s in &ss {
                    for &l in &ls {
                        out.push(FhsfParams::new(m, h, s, l));
                    }
                }
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.m.values().len()
            * self.hue.values().len()
            * self.saturation.values().len()
            * self.lightness.values().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug)]
pub struct TuneResult {
    pub configs: Vec<FhsfParams>,
    /// `pcd[image][config]`.
    pub pcd: Vec<Vec<f64>>,
    /// Per image, config indices from best to worst PCD.
    pub rankings: Vec<Vec<usize>>,
    /// Config indices ranked by PCD summed over images.
    pub global_ranking: Vec<usize>,
}

impl TuneResult {
    /// One row per image × configuration.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("image,m,ht,st,lt,pcd\n");
        for (i, row) in self.pcd.iter().enumerate() {
            for (c, p) in self.configs.iter().zip(row) {
                let t = &c.thresholds;
                out.push_str(&format!(
                    "{i},{},{},{},{},{p:.6}\n",
                    c.m, t.hue, t.saturation, t.lightness
                ));
            }
        }
        out
    }
}

fn lexicographic(a: &FhsfParams, b: &FhsfParams) -> std::cmp::Ordering {
    let (ta, tb) = (&a.thresholds, &b.thresholds);
    a.m.cmp(&b.m)
        .then(ta.hue.total_cmp(&tb.hue))
        .then(ta.saturation.total_cmp(&tb.saturation))
        .then(ta.lightness.total_cmp(&tb.lightness))
}

fn rank(configs: &[FhsfParams], scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..configs.len()).collect();
    order.sort_by(|&a, &b| {
        scores[a]
            .total_cmp(&scores[b])
            .then_with(|| lexicographic(&configs[a], &configs[b]))
    });
    order
}

/// Configurations evaluated per parallel batch.
const BATCH: usize = 64;

/// Scores every grid configuration on every image.
pub fn grid_search(
    originals: &[RgbImage],
    spec: &NoiseSpec,
    grid: &ParamGrid,
    scielab: &Scielab,
) -> Result<TuneResult> {
    if originals.is_empty() {
        return Err(Error::NoImages);
    }
    let configs = grid.configs();
    if configs.is_empty() {
        return Err(Error::EmptyGrid);
    }
    for c in &configs {
        c.validate()?;
    }
    let pcd = originals
        .iter()
        .map(|img| score_image(img, spec, &configs, scielab))
        .collect::<Result<Vec<_>>>()?;
    let rankings = pcd.iter().map(|row| rank(&configs, row)).collect();
    let totals: Vec<f64> = (0..configs.len())
        .map(|c| pcd.iter().map(|row| row[c]).sum())
        .collect();
    let global_ranking = rank(&configs, &totals);
    Ok(TuneResult {
        configs,
        pcd,
        rankings,
        global_ranking,
    })
}

/// PCD of every configuration on one image.
///
/// The filter output is fully determined by which pixels are classified
/// noisy: those take the (configuration independent) vector median of the
/// noisy image, all others keep their noisy value. Configurations that
/// produce the same classification therefore share a score.
fn score_image(
    original: &RgbImage,
    spec: &NoiseSpec,
    configs: &[FhsfParams],
    scielab: &Scielab,
) -> Result<Vec<f64>> {
    let (noisy, _) = inject(original, spec)?;
    let (median, _) = vmf_filter(&noisy, Norm::L2);
    let plane = hsl_plane(&noisy);
    let reference = scielab.reference(original);
    let (width, height) = noisy.dimensions();

    let mut cache: HashMap<Vec<u64>, f64> = HashMap::new();
    let mut scores = Vec::with_capacity(configs.len());
    for batch in configs.chunks(BATCH) {
        let masks: Vec<Vec<u64>> = batch
            .par_iter()
            .map(|c| {
                let peer = switching::HslSimilarity {
                    plane: &plane,
                    thresholds: c.thresholds,
                };
                pack(&switching::noisy_mask(width, height, c.m, &peer))
            })
            .collect();
        let mut fresh: Vec<&Vec<u64>> = masks.iter().filter(|m| !cache.contains_key(*m)).collect();
        fresh.sort();
        fresh.dedup();
        let computed = fresh
            .par_iter()
            .map(|mask| reference.pcd(&compose(&noisy, &median, mask)))
            .collect::<Result<Vec<f64>>>()?;
        for (mask, value) in fresh.into_iter().zip(computed) {
            cache.insert(mask.clone(), value);
        }
        scores.extend(masks.iter().map(|m| cache[m]));
    }
    Ok(scores)
}

fn pack(mask: &[bool]) -> Vec<u64> {
    mask.chunks(64)
        .map(|c| {
            c.iter()
                .enumerate()
                .fold(0u64, |acc, (k, &b)| acc | (u64::from(b) << k))
        })
        .collect()
}

fn compose(noisy: &RgbImage, median: &RgbImage, mask: &[u64]) -> RgbImage {
    let mut out = noisy.clone();
    let (width, height) = noisy.dimensions();
    for i in 0..width * height {
        if mask[i / 64] >> (i % 64) & 1 == 1 {
            out.set_pixel(i % width, i / width, median.pixel_at_index(i));
        }
    }
    out
}

/// Result of intersecting the per-image top lists.
#[derive(Clone, Debug, PartialEq)]
pub struct Intersection {
    /// Config indices present in every image's top list, in grid order.
    pub configs: Vec<usize>,
    /// Set when the intersection is empty.
    pub diagnostic: Option<String>,
}

/// Intersects, across images, the `ceil(fraction * |grid|)` best configurations.
pub fn top_fraction_intersect(result: &TuneResult, fraction: f64) -> Intersection {
    let n = result.configs.len();
    let take = ((fraction.clamp(0.0, 1.0) * n as f64) - 1e-9)
        .ceil()
        .max(1.0) as usize;
    let take = take.min(n);
    let mut count = vec![0usize; n];
    for ranking in &result.rankings {
        for &c in &ranking[..take] {
            count[c] += 1;
        }
    }
    let images = result.rankings.len();
    let configs: Vec<usize> = (0..n)
        .filter(|&c| images > 0 && count[c] == images)
        .collect();
    let diagnostic = configs.is_empty().then(|| {
        format!(
            "no configuration is among the best {take} of {n} on all {images} images; \
             try a larger fraction"
        )
    });
    Intersection {
        configs,
        diagnostic,
    }
}

/// For each image, the lowest PCD reached at every peer-group size.
pub fn min_pcd_per_m(result: &TuneResult) -> Vec<BTreeMap<usize, f64>> {
    result
        .pcd
        .iter()
        .map(|row| {
            let mut best: BTreeMap<usize, f64> = BTreeMap::new();
            for (c, &p) in result.configs.iter().zip(row) {
                best.entry(c.m).and_modify(|v| *v = v.min(p)).or_insert(p);
            }
            best
        })
        .collect()
}

/// Peer-group size with the lowest PCD in a per-m minimum map; ties go to
/// the smaller m.
pub fn best_m(per_m: &BTreeMap<usize, f64>) -> Option<usize> {
    per_m
        .iter()
        .min_by(|a, b| a.1.total_cmp(b.1).then(a.0.cmp(b.0)))
        .map(|(&m, _)| m)
}

/// Bounding ranges (min, max) of Ht, St and Lt over a set of configurations.
pub fn threshold_span(configs: &[FhsfParams], picked: &[usize]) -> Option<[(f64, f64); 3]> {
    let mut it = picked.iter().map(|&i| &configs[i].thresholds);
    let first = it.next()?;
    let mut span = [
        (first.hue, first.hue),
        (first.saturation, first.saturation),
        (first.lightness, first.lightness),
    ];
    for t in it {
        for (s, v) in span.iter_mut().zip([t.hue, t.saturation, t.lightness]) {
            s.0 = s.0.min(v);
            s.1 = s.1.max(v);
        }
    }
    Some(span)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filters::fhsf_filter;
    use crate::metrics::pcd;

    fn scene(w: usize, h: usize, shift: usize) -> RgbImage {
        RgbImage::from_fn(w, h, |x, y| {
            let band = ((x + shift) / 6 + y / 5) % 4;
            let base = [[180, 60, 50], [40, 150, 70], [60, 80, 190], [200, 190, 90]][band];
            [
                base[0] + (x % 5) as u8 * 3,
                base[1] + (y % 4) as u8 * 4,
                base[2],
            ]
        })
        .unwrap()
    }

    #[test]
    fn default_grid_size() {
        let grid = ParamGrid::default();
        assert_eq!(grid.len(), 8 * 8 * 7 * 9);
        assert_eq!(grid.len(), 4032);
        let configs = grid.configs();
        assert_eq!(configs.len(), 4032);
        for w in configs.windows(2) {
            assert_eq!(lexicographic(&w[0], &w[1]), std::cmp::Ordering::Less);
        }
    }

    #[test]
    fn parse_ranges() {
        assert_eq!(
            "1:8:1".parse::<Range<usize>>().unwrap(),
            Range::new(1, 8, 1)
        );
        assert_eq!(
            "6:20:2".parse::<Range<f64>>().unwrap(),
            Range::new(6.0, 20.0, 2.0)
        );
        assert_eq!("3".parse::<Range<usize>>().unwrap(), Range::new(3, 3, 1));
        assert!("1:2:3:4".parse::<Range<usize>>().is_err());
        assert!("a:b".parse::<Range<f64>>().is_err());
        assert_eq!(Range::new(0.1, 0.3, 0.1).values().len(), 3);
        assert!(Range::new(1.0, 0.0, 1.0).values().is_empty());
        assert!(Range::new(1usize, 4, 0).values().is_empty());
    }

    #[test]
    fn empty_inputs_rejected() {
        let img = scene(16, 16, 0);
        let s = Scielab::default();
        let spec = NoiseSpec::with_probability(0.1, 1);
        assert!(matches!(
            grid_search(&[], &spec, &ParamGrid::default(), &s),
            Err(Error::NoImages)
        ));
        let grid = ParamGrid {
            hue: Range::new(5.0, 1.0, 1.0),
            ..ParamGrid::default()
        };
        assert!(matches!(
            grid_search(&[img], &spec, &grid, &s),
            Err(Error::EmptyGrid)
        ));
    }

    #[test]
    fn single_configuration() {
        let img = scene(24, 20, 0);
        let params = FhsfParams::default();
        let r = grid_search(
            &[img],
            &NoiseSpec::with_probability(0.1, 2),
            &ParamGrid::single(&params),
            &Scielab::default(),
        )
        .unwrap();
        assert_eq!(r.configs, vec![params]);
        assert_eq!(r.rankings, vec![vec![0]]);
        assert_eq!(top_fraction_intersect(&r, 0.05).configs, vec![0]);
        assert_eq!(min_pcd_per_m(&r)[0].len(), 1);
    }

    #[test]
    fn scores_match_direct_recomputation() {
        let img = scene(30, 26, 3);
        let spec = NoiseSpec::with_probability(0.12, 5);
        let grid = ParamGrid {
            m: Range::new(2, 4, 1),
            hue: Range::new(10.0, 10.0, 1.0),
            saturation: Range::new(10.0, 10.0, 1.0),
            lightness: Range::new(48.0, 48.0, 1.0),
        };
        let s = Scielab::default();
        let r = grid_search(std::slice::from_ref(&img), &spec, &grid, &s).unwrap();
        let (noisy, _) = inject(&img, &spec).unwrap();
        let direct: Vec<f64> = r
            .configs
            .iter()
            .map(|c| pcd(&img, &fhsf_filter(&noisy, c).unwrap().0, &s).unwrap())
            .collect();
        for (a, b) in r.pcd[0].iter().zip(&direct) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
        assert_eq!(r.rankings[0], rank(&r.configs, &direct));
    }

    #[test]
    fn identical_images_share_top_list() {
        let img = scene(24, 24, 1);
        let grid = ParamGrid {
            m: Range::new(1, 4, 1),
            hue: Range::new(6.0, 14.0, 4.0),
            saturation: Range::new(6.0, 14.0, 4.0),
            lightness: Range::new(40.0, 56.0, 8.0),
        };
        let spec = NoiseSpec::with_probability(0.1, 9);
        let s = Scielab::default();
        let single = grid_search(std::slice::from_ref(&img), &spec, &grid, &s).unwrap();
        let double = grid_search(&[img.clone(), img], &spec, &grid, &s).unwrap();
        let mut expected = single.rankings[0][..top_count(grid.len(), 0.1)].to_vec();
        expected.sort_unstable();
        assert_eq!(top_fraction_intersect(&double, 0.1).configs, expected);
        assert_eq!(top_fraction_intersect(&single, 0.1).configs, expected);
    }

    fn top_count(n: usize, fraction: f64) -> usize {
        (fraction * n as f64).ceil() as usize
    }

    #[test]
    fn disjoint_top_lists_give_diagnostic() {
        let configs = vec![
            FhsfParams::new(1, 6.0, 4.0, 32.0),
            FhsfParams::new(2, 6.0, 4.0, 32.0),
        ];
        let r = TuneResult {
            configs,
            pcd: vec![vec![1.0, 2.0], vec![2.0, 1.0]],
            rankings: vec![vec![0, 1], vec![1, 0]],
            global_ranking: vec![0, 1],
        };
        let hit = top_fraction_intersect(&r, 0.5);
        assert!(hit.configs.is_empty());
        assert!(hit.diagnostic.is_some());
        assert_eq!(top_fraction_intersect(&r, 1.0).configs, vec![0, 1]);
    }

    #[test]
    fn intersection_monotone_and_minima_sound() {
        let imgs = [scene(20, 20, 0), scene(20, 20, 7)];
        let grid = ParamGrid {
            m: Range::new(1, 5, 2),
            hue: Range::new(6.0, 20.0, 7.0),
            saturation: Range::new(4.0, 16.0, 6.0),
            lightness: Range::new(32.0, 64.0, 16.0),
        };
        let r = grid_search(
            &imgs,
            &NoiseSpec::with_probability(0.15, 4),
            &grid,
            &Scielab::default(),
        )
        .unwrap();
        let mut prev: Vec<usize> = Vec::new();
        for f in [0.05, 0.1, 0.25, 0.5, 1.0] {
            let cur = top_fraction_intersect(&r, f).configs;
            assert!(prev.iter().all(|c| cur.contains(c)));
            prev = cur;
        }
        assert_eq!(prev.len(), r.configs.len());
        for (img, per_m) in min_pcd_per_m(&r).iter().enumerate() {
            assert_eq!(per_m.keys().copied().collect::<Vec<_>>(), vec![1, 3, 5]);
            for (c, &p) in r.configs.iter().zip(&r.pcd[img]) {
                assert!(per_m[&c.m] <= p && per_m[&c.m] >= 0.0);
            }
        }
        // same seed, same ranking
        let again = grid_search(
            &imgs,
            &NoiseSpec::with_probability(0.15, 4),
            &grid,
            &Scielab::default(),
        )
        .unwrap();
        assert_eq!(again.rankings, r.rankings);
        assert_eq!(again.global_ranking, r.global_ranking);
    }

    #[test]
    fn csv_has_row_per_image_and_config() {
        let img = scene(12, 12, 0);
        let grid = ParamGrid {
            m: Range::new(2, 3, 1),
            ..ParamGrid::single(&FhsfParams::default())
        };
        let r = grid_search(
            &[img.clone(), img],
            &NoiseSpec::with_probability(0.1, 1),
            &grid,
            &Scielab::default(),
        )
        .unwrap();
        let csv = r.to_csv();
        assert_eq!(csv.lines().count(), 1 + 2 * 2);
        assert!(csv.starts_with("image,m,ht,st,lt,pcd\n0,2,10,10,48,"));
    }

    #[test]
    fn span_of_configs() {
        let configs = ParamGrid::default().configs();
        assert_eq!(threshold_span(&configs, &[]), None);
        let span = threshold_span(&configs, &[0, configs.len() - 1]).unwrap();
        assert_eq!(span, [(6.0, 20.0), (4.0, 16.0), (32.0, 64.0)]);
    }
}
