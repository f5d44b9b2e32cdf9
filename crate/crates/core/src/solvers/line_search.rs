//! Derivative-free one-dimensional minimization driven one evaluation at a
//! time: expanding bracket search followed by Brent-style refinement
//! (parabolic steps through the three best points, golden sections when a
//! parabola is not trustworthy).

const GROWTH: f64 = 1.618_033_988_749_895;
const GOLDEN: f64 = 0.381_966_011_250_105_1;
const TOLERANCE: f64 = 1e-11;
const MAX_EXPANSIONS: usize = 60;
const MAX_EVALUATIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Stage {
    Forward,
    Backward,
    Expand,
    Golden,
    Done,
}

/// Minimizes `phi(t)` given `phi(0)` and a trial step `h`. Call [`next`] for
/// the abscissa to evaluate and [`feed`] with its value until `next` returns
/// `None`; [`result`] then holds the best abscissa and its value.
///
/// [`next`]: LineSearch::next
/// [`feed`]: LineSearch::feed
/// [`result`]: LineSearch::result
#[derive(Debug, Clone)]
pub struct LineSearch {
    stage: Stage,
    step: f64,
    lo: f64,
    hi: f64,
    best: (f64, f64),
    /// Second and third best points of the refinement stage.
    second: (f64, f64),
    third: (f64, f64),
    /// Lengths of the last two refinement moves.
    moves: (f64, f64),
    /// Previous point of the expansion and the forward probe's value.
    trail: (f64, f64),
    pending: f64,
    expansions: usize,
    evaluations: usize,
}

impl LineSearch {
    pub fn new(value_at_zero: f64, step: f64) -> Self {
        Self {
            stage: Stage::Forward,
            step,
            lo: 0.0,
            hi: 0.0,
            best: (0.0, value_at_zero),
            second: (0.0, value_at_zero),
            third: (0.0, value_at_zero),
            moves: (f64::INFINITY, f64::INFINITY),
            trail: (0.0, value_at_zero),
            pending: step,
            expansions: 0,
            evaluations: 0,
        }
    }

    pub fn next(&self) -> Option<f64> {
        (self.stage != Stage::Done).then_some(self.pending)
    }

    pub fn result(&self) -> (f64, f64) {
        self.best
    }

    pub fn is_done(&self) -> bool {
        self.stage == Stage::Done
    }

    pub fn feed(&mut self, value: f64) {
        self.evaluations += 1;
        let t = self.pending;
        let (b, fb) = self.best;
        match self.stage {
            Stage::Forward => {
                if value < fb {
                    self.trail = (b, fb);
                    self.best = (t, value);
                    self.expand();
                } else {
                    self.trail = (t, value);
                    self.pending = -self.step;
                    self.stage = Stage::Backward;
                }
            }
            Stage::Backward => {
                if value < fb {
                    self.trail = (b, fb);
                    self.best = (t, value);
                    self.expand();
                } else {
                    self.lo = t;
                    self.hi = self.trail.0;
                    self.second = self.trail;
                    self.third = (t, value);
                    self.golden();
                }
            }
            Stage::Expand => {
                if value < fb {
                    self.trail = (b, fb);
                    self.best = (t, value);
                    self.expansions += 1;
                    if self.expansions >= MAX_EXPANSIONS {
                        self.stage = Stage::Done;
                    } else {
                        self.expand();
                    }
                } else {
                    let a = self.trail.0;
                    self.lo = a.min(t);
                    self.hi = a.max(t);
                    self.second = self.trail;
                    self.third = (t, value);
                    self.golden();
                }
            }
            Stage::Golden => {
                if value < fb {
                    if t > b {
                        self.lo = b;
                    } else {
                        self.hi = b;
                    }
                    self.third = self.second;
                    self.second = self.best;
                    self.best = (t, value);
                } else {
                    if t > b {
                        self.hi = t;
                    } else {
                        self.lo = t;
                    }
                    if value <= self.second.1 || self.second.0 == b {
                        self.third = self.second;
                        self.second = (t, value);
                    } else if value <= self.third.1 || self.third.0 == b || self.third.0 == self.second.0 {
                        self.third = (t, value);
                    }
                }
                self.golden();
            }
            Stage::Done => {}
        }
    }

    fn expand(&mut self) {
        let (b, _) = self.best;
        self.pending = b + GROWTH * (b - self.trail.0);
        self.stage = Stage::Expand;
    }

    fn golden(&mut self) {
        let b = self.best.0;
        let tol = TOLERANCE * (b.abs() + self.step.abs());
        if self.hi - self.lo <= 2.0 * tol || self.evaluations >= MAX_EVALUATIONS {
            self.stage = Stage::Done;
            return;
        }
        let golden = if self.hi - b > b - self.lo { b + GOLDEN * (self.hi - b) } else { b - GOLDEN * (b - self.lo) };
        let u = match self.parabola() {
            Some(u) if (u - b).abs() < 0.5 * self.moves.1 && u - self.lo > tol && self.hi - u > tol => {
                if (u - b).abs() < tol {
                    b + tol.copysign(if self.hi - b > b - self.lo { 1.0 } else { -1.0 })
                } else {
                    u
                }
            }
            _ => golden,
        };
        self.moves = ((u - b).abs(), self.moves.0);
        self.pending = u;
        self.stage = Stage::Golden;
    }

    /// Vertex of the parabola through the three best points.
    fn parabola(&self) -> Option<f64> {
        let (x, fx) = self.best;
        let (w, fw) = self.second;
        let (v, fv) = self.third;
        let r = (x - w) * (fx - fv);
        let q = (x - v) * (fx - fw);
        let denominator = 2.0 * (q - r);
        let numerator = (x - v) * q - (x - w) * r;
        let u = x - numerator / denominator;
        (denominator != 0.0 && u.is_finite()).then_some(u)
    }
}
