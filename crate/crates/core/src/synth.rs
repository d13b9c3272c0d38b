//! Synthetic fixtures with planted structure: Gaussian blobs and a
//! templated query corpus whose embeddings are centred on per-intent means.

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::corpus::{EmbeddingSet, QueryRecord};
use crate::util;

#[derive(Debug, Clone)]
pub struct LabelledPoints {
    pub points: Array2<f32>,
    /// Generating component per row.
    pub truth: Vec<i32>,
}

fn centres(count: usize, dim: usize, spacing: f64, rng: &mut util::Rng) -> Vec<Vec<f64>> {
    // Scaled basis vectors are exactly `spacing` apart; beyond `dim` centres
    // fall back to random directions of the same norm.
    let norm = spacing / std::f64::consts::SQRT_2;
    (0..count)
        .map(|c| {
            if count <= dim {
                let mut v = vec![0.0; dim];
                v[c] = norm;
                v
            } else {
                let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut *rng)).collect();
                let len = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                v.into_iter().map(|x| x * norm / len).collect()
            }
        })
        .collect()
}

/// Isotropic Gaussian blobs of the given sizes, centres `separation * std`
/// apart, rows in blob order.
pub fn gaussian_blobs(
    sizes: &[usize],
    dim: usize,
    separation: f64,
    std: f64,
    seed: u64,
) -> LabelledPoints {
    let mut rng = util::rng(seed);
    let centres = centres(sizes.len(), dim, separation * std, &mut rng);
    let n: usize = sizes.iter().sum();
    let mut points = Array2::<f32>::zeros((n, dim));
    let mut truth = Vec::with_capacity(n);
    let mut row = 0;
    for (c, &size) in sizes.iter().enumerate() {
        for _ in 0..size {
            for j in 0..dim {
                let z: f64 = StandardNormal.sample(&mut rng);
                points[[row, j]] = (centres[c][j] + std * z) as f32;
            }
            truth.push(c as i32);
            row += 1;
        }
    }
    LabelledPoints { points, truth }
}

/// Blobs whose spread lives in a random `intrinsic`-dimensional subspace of
/// the `dim`-dimensional ambient space, plus small isotropic jitter.
pub fn subspace_blobs(
    sizes: &[usize],
    dim: usize,
    intrinsic: usize,
    separation: f64,
    jitter: f64,
    seed: u64,
) -> LabelledPoints {
    let mut rng = util::rng(seed);
    let centres = centres(sizes.len(), dim, separation, &mut rng);
    let n: usize = sizes.iter().sum();
    let mut points = Array2::<f32>::zeros((n, dim));
    let mut truth = Vec::with_capacity(n);
    let mut row = 0;
    for (c, &size) in sizes.iter().enumerate() {
        let basis: Vec<Vec<f64>> = (0..intrinsic)
            .map(|_| {
                let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
                let len = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                v.into_iter().map(|x| x / len).collect()
            })
            .collect();
        for _ in 0..size {
            let coef: Vec<f64> = (0..intrinsic).map(|_| StandardNormal.sample(&mut rng)).collect();
            for j in 0..dim {
                let mut v = centres[c][j];
                for (b, z) in basis.iter().zip(&coef) {
                    v += b[j] * z;
                }
                let e: f64 = StandardNormal.sample(&mut rng);
                points[[row, j]] = (v + jitter * e) as f32;
            }
            truth.push(c as i32);
            row += 1;
        }
    }
    LabelledPoints { points, truth }
}

/// Query templates, one per planted intent; `{}` is replaced by a filler.
pub const INTENT_TEMPLATES: [(&str, &[&str]); 20] = [
    ("where is {}", &["paris", "lima", "oslo", "cairo", "quito", "perth"]),
    ("what county is {} in", &["austin", "salem", "dayton", "reno", "tulsa", "boise"]),
    ("weather in {} today", &["denver", "miami", "boston", "seattle", "phoenix", "omaha"]),
    ("distance from {} to chicago", &["detroit", "memphis", "atlanta", "dallas", "toledo", "akron"]),
    ("population of {} city", &["tokyo", "delhi", "shanghai", "mumbai", "lagos", "karachi"]),
    ("cost of living in {}", &["london", "zurich", "sydney", "dublin", "geneva", "oslo"]),
    ("property tax rate {} county", &["cook", "harris", "kings", "orange", "dade", "wayne"]),
    ("time zone for {}", &["arizona", "hawaii", "alaska", "guam", "samoa", "yukon"]),
    ("zip code for {}", &["brooklyn", "queens", "harlem", "bronx", "malibu", "aspen"]),
    ("how tall is mount {}", &["everest", "rainier", "fuji", "kenya", "elbrus", "hood"]),
    ("longest river in {}", &["africa", "europe", "asia", "brazil", "canada", "india"]),
    ("capital of {} state", &["ohio", "texas", "utah", "iowa", "maine", "idaho"]),
    ("average temperature {} january", &["madrid", "rome", "athens", "lisbon", "vienna", "prague"]),
    ("what continent is {} on", &["egypt", "chile", "nepal", "peru", "chad", "laos"]),
    ("national parks near {}", &["yosemite", "moab", "jackson", "bozeman", "flagstaff", "bend"]),
    ("elevation of {} colorado", &["leadville", "vail", "breckenridge", "telluride", "durango", "ouray"]),
    ("best beaches in {}", &["bali", "maui", "cancun", "phuket", "aruba", "fiji"]),
    ("area code {} phone", &["212", "310", "415", "702", "305", "617"]),
    ("flights from {} airport", &["heathrow", "ohare", "dulles", "logan", "newark", "midway"]),
    ("volcano eruption {} island", &["hawaii", "iceland", "java", "sicily", "tonga", "montserrat"]),
];

#[derive(Debug, Clone)]
pub struct PlantedCorpus {
    pub queries: Vec<QueryRecord>,
    pub embeddings: EmbeddingSet,
    /// Planted intent per query, -1 for background noise.
    pub truth: Vec<i32>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantedSpec {
    pub n_intents: usize,
    pub per_intent: usize,
    /// Ambiguous queries placed midway between two random intents.
    pub n_noise: usize,
    pub dim: usize,
    /// Distance between intent centres, in units of the per-axis std (1).
    pub separation: f64,
    pub seed: u64,
}

impl Default for PlantedSpec {
    fn default() -> Self {
        Self {
            n_intents: 20,
            per_intent: 240,
            n_noise: 200,
            dim: 384,
            separation: 12.0,
            seed: 7,
        }
    }
}

const NOISE_QUERIES: [&str; 8] = [
    "how to get from {} to {}",
    "{} or {} which is better",
    "compare {} and {}",
    "{} vs {}",
    "cheap trip {} {}",
    "history of {} and {}",
    "{} {} news",
    "route between {} and {}",
];

/// Templated queries with `dim`-dimensional embeddings drawn from isotropic
/// unit Gaussians around per-intent centres, plus noise queries centred
/// between pairs of intents. Rows are shuffled.
pub fn planted_intents(spec: &PlantedSpec) -> PlantedCorpus {
    assert!(spec.n_intents >= 2 && spec.n_intents <= INTENT_TEMPLATES.len());
    let mut rng = util::rng(spec.seed);
    let sizes = vec![spec.per_intent; spec.n_intents];
    let blobs = gaussian_blobs(&sizes, spec.dim, spec.separation, 1.0, rng.random());
    let centre = |c: usize| -> Vec<f64> {
        let rows: Vec<usize> = (0..blobs.truth.len()).filter(|&i| blobs.truth[i] == c as i32).collect();
        (0..spec.dim)
            .map(|j| rows.iter().map(|&r| blobs.points[[r, j]] as f64).sum::<f64>() / rows.len() as f64)
            .collect()
    };
    let centres: Vec<Vec<f64>> = (0..spec.n_intents).map(centre).collect();

    let n = blobs.truth.len() + spec.n_noise;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut queries = Vec::with_capacity(n);
    let mut truth = Vec::with_capacity(n);
    let mut matrix = Array2::<f32>::zeros((n, spec.dim));
    let filler = |intent: usize, rng: &mut util::Rng| {
        let fillers = INTENT_TEMPLATES[intent].1;
        fillers[rng.random_range(0..fillers.len())]
    };
    for (row, &src) in order.iter().enumerate() {
        let text = if src < blobs.truth.len() {
            let intent = blobs.truth[src] as usize;
            let mut text = INTENT_TEMPLATES[intent].0.replace("{}", filler(intent, &mut rng));
            if rng.random_bool(0.2) {
                text = format!("{text} {}", ["near me", "map", "now", "info"][rng.random_range(0..4)]);
            }
            truth.push(intent as i32);
            matrix.row_mut(row).assign(&blobs.points.row(src));
            text
        } else {
            let a = rng.random_range(0..spec.n_intents);
            let b = (a + rng.random_range(1..spec.n_intents)) % spec.n_intents;
            for j in 0..spec.dim {
                let z: f64 = StandardNormal.sample(&mut rng);
                matrix[[row, j]] = (0.5 * (centres[a][j] + centres[b][j]) + z) as f32;
            }
            truth.push(-1);
            let template = NOISE_QUERIES[rng.random_range(0..NOISE_QUERIES.len())];
            template
                .replacen("{}", filler(a, &mut rng), 1)
                .replacen("{}", filler(b, &mut rng), 1)
        };
        queries.push(QueryRecord {
            id: 100_000 + row as u64 * 7,
            text,
        });
    }
    let ids = queries.iter().map(|q| q.id).collect();
    PlantedCorpus {
        queries,
        embeddings: EmbeddingSet::new(ids, matrix).expect("valid synthetic embeddings"),
        truth,
    }
}
