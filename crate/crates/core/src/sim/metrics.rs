use super::EpisodeResult;

/// What aggregation needs from one episode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeSummary {
    pub collided: bool,
    pub success: bool,
    pub crossing_time: Option<f64>,
    pub final_py: f64,
}

impl From<&EpisodeResult> for EpisodeSummary {
    fn from(r: &EpisodeResult) -> Self {
        Self { collided: r.collided, success: r.success, crossing_time: r.crossing_time, final_py: r.final_py }
    }
}

/// Rates are fractions of all episodes. Means are `None` when nothing qualifies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub count: u64,
    pub success_rate: Option<f64>,
    pub collision_rate: Option<f64>,
    /// Neither collided nor in the target lane at the end.
    pub timeout_rate: Option<f64>,
    /// Over successful episodes.
    pub mean_crossing_time: Option<f64>,
    /// Over episodes without a collision.
    pub mean_final_py: Option<f64>,
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Compensated {
    sum: f64,
    comp: f64,
}

impl Compensated {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }

    fn merge(&mut self, other: &Self) {
        self.add(other.sum);
        self.add(other.comp);
    }
}

/// Streaming aggregation; `merge` combines partial results from independent workers.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MetricsAccumulator {
    count: u64,
    successes: u64,
    collisions: u64,
    non_collided: u64,
    crossing: Compensated,
    final_py: Compensated,
}

impl MetricsAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, s: &EpisodeSummary) {
        self.count += 1;
        if s.collided {
            self.collisions += 1;
        } else {
            self.non_collided += 1;
            self.final_py.add(s.final_py);
        }
        if s.success {
            self.successes += 1;
            if let Some(t) = s.crossing_time {
                self.crossing.add(t);
            }
        }
    }

    pub fn merge(&mut self, other: &Self) {
        self.count += other.count;
        self.successes += other.successes;
        self.collisions += other.collisions;
        self.non_collided += other.non_collided;
        self.crossing.merge(&other.crossing);
        self.final_py.merge(&other.final_py);
    }

    pub fn finish(&self) -> Metrics {
        let over = |k: u64, n: u64| (n > 0).then(|| k as f64 / n as f64);
        let mean = |s: &Compensated, n: u64| (n > 0).then(|| s.value() / n as f64);
        let timeouts = self.count - self.successes - self.collisions;
        Metrics {
            count: self.count,
            success_rate: over(self.successes, self.count),
            collision_rate: over(self.collisions, self.count),
            timeout_rate: over(timeouts, self.count),
            mean_crossing_time: mean(&self.crossing, self.successes),
            mean_final_py: mean(&self.final_py, self.non_collided),
        }
    }
}

/// Metrics of a complete batch, computed in one pass per quantity.
pub fn aggregate(results: &[EpisodeSummary]) -> Metrics {
    let n = results.len() as u64;
    let successes = results.iter().filter(|r| r.success).count() as u64;
    let collisions = results.iter().filter(|r| r.collided).count() as u64;
    let sum = |xs: &mut dyn Iterator<Item = f64>| {
        let mut c = Compensated::default();
        xs.for_each(|x| c.add(x));
        c.value()
    };
    let crossing = sum(&mut results.iter().filter(|r| r.success).filter_map(|r| r.crossing_time));
    let safe: u64 = n - collisions;
    let final_py = sum(&mut results.iter().filter(|r| !r.collided).map(|r| r.final_py));
    let over = |k: u64| (n > 0).then(|| k as f64 / n as f64);
    Metrics {
        count: n,
        success_rate: over(successes),
        collision_rate: over(collisions),
        timeout_rate: over(n - successes - collisions),
        mean_crossing_time: (successes > 0).then(|| crossing / successes as f64),
        mean_final_py: (safe > 0).then(|| final_py / safe as f64),
    }
}
