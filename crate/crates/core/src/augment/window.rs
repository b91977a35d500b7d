use ndarray::{s, Array2};

use crate::error::{Error, Result};

/// Sliding record of the last `w` epochs of per-node discriminator scores.
///
/// Row `v` is `[s_p(t-w+1), s_n(t-w+1), …, s_p(t), s_n(t)]`: oldest epoch
/// first, newest in the last two columns. Unfilled epochs are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreWindow {
    window: Array2<f64>,
    w: usize,
    filled_epochs: usize,
}

impl ScoreWindow {
    pub fn new(n: usize, w: usize) -> Self {
        assert!(w >= 1, "window length must be positive");
        ScoreWindow {
            window: Array2::zeros((n, 2 * w)),
            w,
            filled_epochs: 0,
        }
    }

    /// Restores a window from its matrix form.
    pub fn from_matrix(window: Array2<f64>, filled_epochs: usize) -> Result<Self> {
        if window.ncols() == 0 || window.ncols() % 2 != 0 {
            return Err(Error::Input("score window needs an even, nonzero column count".into()));
        }
        let w = window.ncols() / 2;
        if filled_epochs > w {
            return Err(Error::Input(format!("{filled_epochs} filled epochs exceed window length {w}")));
        }
        Ok(ScoreWindow {
            window,
            w,
            filled_epochs,
        })
    }

    pub fn n(&self) -> usize {
        self.window.nrows()
    }

    pub fn w(&self) -> usize {
        self.w
    }

    pub fn filled_epochs(&self) -> usize {
        self.filled_epochs
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.window
    }

    pub fn row(&self, v: usize) -> &[f64] {
        self.window
            .row(v)
            .to_slice()
            .expect("window rows are contiguous")
    }

    /// Appends one epoch and evicts the oldest.
    pub fn push(&mut self, epoch_pos: &[f64], epoch_neg: &[f64]) -> Result<()> {
        let n = self.n();
        if epoch_pos.len() != n || epoch_neg.len() != n {
            return Err(Error::Contract(format!(
                "score vectors of length {}/{} pushed into a window over {n} nodes",
                epoch_pos.len(),
                epoch_neg.len()
            )));
        }
        if epoch_pos.iter().chain(epoch_neg).any(|x| !x.is_finite()) {
            return Err(Error::Contract("non-finite score pushed into window".into()));
        }
        let cols = 2 * self.w;
        let shifted = self.window.slice(s![.., 2..]).to_owned();
        self.window.slice_mut(s![.., ..cols - 2]).assign(&shifted);
        for v in 0..n {
            self.window[[v, cols - 2]] = epoch_pos[v];
            self.window[[v, cols - 1]] = epoch_neg[v];
        }
        self.filled_epochs = (self.filled_epochs + 1).min(self.w);
        Ok(())
    }

    /// Anomaly-score similarity `S_u · S_v`.
    pub fn anomaly_similarity(&self, u: usize, v: usize) -> Result<f64> {
        if self.filled_epochs == 0 {
            return Err(Error::Contract("score window is empty".into()));
        }
        Ok(self.dot(u, v))
    }

    pub(crate) fn dot(&self, u: usize, v: usize) -> f64 {
        self.row(u).iter().zip(self.row(v)).map(|(a, b)| a * b).sum()
    }

    /// `S_v · S_u` for every `u`, written into `out`.
    pub(crate) fn dot_all(&self, v: usize, out: &mut [f64]) {
        let sv = self.row(v);
        for (u, o) in out.iter_mut().enumerate() {
            *o = self.row(u).iter().zip(sv).map(|(a, b)| a * b).sum();
        }
    }
}
