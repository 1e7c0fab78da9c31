use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

use super::{Action, ActionSpace, EnvFamily, Environment, State, Step};
use crate::error::{invalid, Error, Result};
use crate::mdp::{sample_index, KernelFamily, Perturbation, Policy, TabularMdp};
use crate::rng::ChaCha8Rng;

/// Up, right, down, left.
pub const GRID_ACTIONS: usize = 4;

/// Tabular environment simulated from an explicit MDP.
///
/// Terminal states are absorbing with zero reward in the model; the simulator
/// ends the episode on entering one. Rewards may carry zero-mean Gaussian
/// noise, which leaves the model unchanged.
#[derive(Debug, Clone)]
pub struct TabularEnv {
    mdp: TabularMdp,
    terminal: Vec<bool>,
    horizon: usize,
    reward_noise: f64,
    rng: ChaCha8Rng,
    state: usize,
}

impl TabularEnv {
    pub fn new(mdp: TabularMdp, terminal: Vec<bool>, horizon: usize, reward_noise: f64) -> Result<Self> {
        if terminal.len() != mdp.n_states() {
            return invalid("terminal mask length differs from the state count");
        }
        if horizon == 0 {
            return invalid("horizon must be positive");
        }
        if !(reward_noise >= 0.0) {
            return invalid("reward noise scale must be nonnegative");
        }
        Ok(Self {
            mdp,
            terminal,
            horizon,
            reward_noise,
            rng: ChaCha8Rng::seed_from_u64(0),
            state: 0,
        })
    }

    pub fn mdp(&self) -> &TabularMdp {
        &self.mdp
    }

    pub fn terminal(&self) -> &[bool] {
        &self.terminal
    }

    pub fn state(&self) -> usize {
        self.state
    }

    /// Expected undiscounted return of `policy` over one episode, computed by
    /// backward induction over the horizon.
    pub fn expected_return(&self, policy: &Policy) -> Result<f64> {
        let mdp = &self.mdp;
        policy.check(mdp.n_states(), mdp.n_actions())?;
        let n = mdp.n_states();
        let mut to_go = vec![0.0; n];
        for _ in 0..self.horizon {
            let next: Vec<f64> = (0..n)
                .map(|s| {
                    if self.terminal[s] {
                        return 0.0;
                    }
                    (0..mdp.n_actions())
                        .map(|a| {
                            let pa = policy.prob(s, a);
                            if pa == 0.0 {
                                return 0.0;
                            }
                            let cont: f64 = mdp
                                .row(s, a)
                                .iter()
                                .zip(&to_go)
                                .map(|(p, v)| p * v)
                                .sum();
                            pa * (mdp.reward(s, a) + cont)
                        })
                        .sum()
                })
                .collect();
            to_go = next;
        }
        Ok(mdp
            .initial_dist()
            .iter()
            .zip(&to_go)
            .map(|(p, v)| p * v)
            .sum())
    }
}

impl Environment for TabularEnv {
    fn reset(&mut self, seed: u64) -> State {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
        self.state = sample_index(self.mdp.initial_dist(), &mut self.rng);
        State::Discrete(self.state)
    }

    fn step(&mut self, action: &Action) -> Step {
        let a = match action {
            Action::Discrete(a) if *a < self.mdp.n_actions() => *a,
            other => panic!("invalid action {other:?} for a tabular environment"),
        };
        let mut reward = self.mdp.reward(self.state, a);
        if self.reward_noise > 0.0 {
            let z: f64 = StandardNormal.sample(&mut self.rng);
            reward += self.reward_noise * z;
        }
        self.state = sample_index(self.mdp.row(self.state, a), &mut self.rng);
        Step {
            state: State::Discrete(self.state),
            reward,
            done: self.terminal[self.state],
        }
    }

    fn action_space(&self) -> ActionSpace {
        ActionSpace::Discrete(self.mdp.n_actions())
    }

    fn observation_dim(&self) -> usize {
        0
    }

    fn n_states(&self) -> Option<usize> {
        Some(self.mdp.n_states())
    }

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn r_max(&self) -> f64 {
        self.mdp.r_max()
    }

    fn tabular(&self) -> Option<&TabularEnv> {
        Some(self)
    }
}

/// A tabular family: a kernel family plus terminal mask, horizon and an
/// optional ω component that scales reward noise.
#[derive(Debug, Clone)]
pub struct TabularFamily {
    id: String,
    kernel: KernelFamily,
    terminal: Vec<bool>,
    horizon: usize,
    noise_component: Option<usize>,
}

impl TabularFamily {
    pub fn new(
        id: impl Into<String>,
        kernel: KernelFamily,
        terminal: Vec<bool>,
        horizon: usize,
        noise_component: Option<usize>,
    ) -> Result<Self> {
        if terminal.len() != kernel.base().n_states() {
            return invalid("terminal mask length differs from the state count");
        }
        if let Some(c) = noise_component {
            if c >= kernel.omega_box().len() {
                return invalid("noise component outside the parameter vector");
            }
        }
        Ok(Self {
            id: id.into(),
            kernel,
            terminal,
            horizon,
            noise_component,
        })
    }

    /// 8×8 gridworld whose moves slip to a random other direction with
    /// probability ω ∈ [0, 0.5] (nominal 0.1).
    ///
    /// The start is the bottom-left corner and the goal the bottom-right
    /// corner. A column of pits separates them, pierced by a one-cell gap
    /// at row 5 and open along the top row. Going through the gap is short
    /// but exposes the agent to a pit on both sides; going over the top is
    /// long and safe. Steps cost 0.08, so the detour only pays off once
    /// slipping is likely.
    pub fn slip_grid() -> Self {
        let pits: Vec<(usize, usize)> = (0..7).filter(|&y| y != 5).map(|y| (4, y)).collect();
        let layout = GridLayout {
            width: 8,
            height: 8,
            start: (0, 0),
            goal: (7, 0),
            pits,
            step_reward: -0.08,
            goal_reward: 1.0,
            pit_reward: -1.0,
            gamma: 0.99,
        };
        layout
            .family("slip_grid", vec![[0.0, 0.5]], vec![0.1], 200)
            .expect("built-in layout is valid")
    }

    /// 4×12 cliff walk: the bottom row between start and goal is a cliff
    /// ending the episode with a penalty. ω ∈ [0, 0.4] is the slip
    /// probability (nominal 0.05). Steps cost 0.08.
    pub fn cliff_grid() -> Self {
        let layout = GridLayout {
            width: 12,
            height: 4,
            start: (0, 0),
            goal: (11, 0),
            pits: (1..11).map(|x| (x, 0)).collect(),
            step_reward: -0.08,
            goal_reward: 1.0,
            pit_reward: -1.0,
            gamma: 0.99,
        };
        layout
            .family("cliff_grid", vec![[0.0, 0.4]], vec![0.05], 200)
            .expect("built-in layout is valid")
    }

    /// 20-state chain with left/right actions and the goal at the right end.
    ///
    /// ω = (wind, noise): with probability `wind` ∈ [0, 0.4] the agent is
    /// blown one cell left regardless of its action, and rewards carry
    /// Gaussian noise of scale `noise` ∈ [0, 0.5]. Nominal (0.1, 0).
    pub fn windy_chain() -> Self {
        let len = 20;
        let goal = len - 1;
        let sink = len;
        let n = len + 1;
        let mut base = vec![0.0; n * 2 * n];
        let mut blown = vec![0.0; n * 2 * n];
        let mut rewards = vec![0.0; n * 2];
        for s in 0..n {
            for a in 0..2 {
                let idx = |t: usize| (s * 2 + a) * n + t;
                if s == goal || s == sink {
                    base[idx(sink)] = 1.0;
                    blown[idx(sink)] = 1.0;
                    rewards[s * 2 + a] = if s == goal { 1.0 } else { 0.0 };
                    continue;
                }
                let target = if a == 0 { s.saturating_sub(1) } else { s + 1 };
                base[idx(target)] = 1.0;
                blown[idx(s.saturating_sub(1))] = 1.0;
                rewards[s * 2 + a] = -0.01;
            }
        }
        let mut init = vec![0.0; n];
        init[0] = 1.0;
        let mdp = TabularMdp::new(n, 2, base, rewards, 0.99, init).expect("chain is valid");
        let kernel = KernelFamily::new(
            mdp,
            Perturbation::Mixture { alternative: blown },
            0,
            vec![[0.0, 0.4], [0.0, 0.5]],
            vec![0.1, 0.0],
        )
        .expect("chain family is valid");
        let mut terminal = vec![false; n];
        terminal[sink] = true;
        Self::new("windy_chain", kernel, terminal, 100, Some(1)).expect("chain family is valid")
    }

    /// Same family with a different uncertainty box. The nominal parameter
    /// is clamped into the new box.
    pub fn with_omega_box(&self, omega_box: Vec<[f64; 2]>) -> Result<Self> {
        let nominal = self
            .kernel
            .nominal_omega()
            .iter()
            .zip(&omega_box)
            .map(|(w, [lo, hi])| w.clamp(*lo, *hi))
            .collect();
        self.with_box_and_nominal(omega_box, nominal)
    }

    pub fn with_box_and_nominal(&self, omega_box: Vec<[f64; 2]>, nominal: Vec<f64>) -> Result<Self> {
        let kernel = KernelFamily::new(
            self.kernel.base().clone(),
            self.perturbation().clone(),
            self.kernel_component(),
            omega_box,
            nominal,
        )?;
        Self::new(
            self.id.clone(),
            kernel,
            self.terminal.clone(),
            self.horizon,
            self.noise_component,
        )
    }

    fn perturbation(&self) -> &Perturbation {
        self.kernel.perturbation()
    }

    fn kernel_component(&self) -> usize {
        self.kernel.component()
    }

    pub fn kernel(&self) -> &KernelFamily {
        &self.kernel
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn terminal(&self) -> &[bool] {
        &self.terminal
    }

    pub fn env_at(&self, omega: &[f64]) -> Result<TabularEnv> {
        let mdp = self.kernel.perturb_kernel(omega)?;
        let noise = self.noise_component.map_or(0.0, |c| omega[c]);
        TabularEnv::new(mdp, self.terminal.clone(), self.horizon, noise)
    }
}

impl EnvFamily for TabularFamily {
    fn id(&self) -> &str {
        &self.id
    }

    fn omega_box(&self) -> &[[f64; 2]] {
        self.kernel.omega_box()
    }

    fn nominal_omega(&self) -> &[f64] {
        self.kernel.nominal_omega()
    }

    fn make(&self, omega: &[f64]) -> Result<Box<dyn Environment>> {
        Ok(Box::new(self.env_at(omega)?))
    }

    fn as_tabular(&self) -> Option<&TabularFamily> {
        Some(self)
    }

    fn gamma(&self) -> f64 {
        self.kernel.base().gamma()
    }
}

/// Gridworld description. Cells are indexed `y * width + x`; one extra
/// absorbing sink state follows the cells. Leaving the goal or a pit pays
/// the corresponding reward and enters the sink.
#[derive(Debug, Clone)]
pub struct GridLayout {
    pub width: usize,
    pub height: usize,
    pub start: (usize, usize),
    pub goal: (usize, usize),
    pub pits: Vec<(usize, usize)>,
    pub step_reward: f64,
    pub goal_reward: f64,
    pub pit_reward: f64,
    pub gamma: f64,
}

impl GridLayout {
    pub fn n_states(&self) -> usize {
        self.width * self.height + 1
    }

    pub fn cell(&self, x: usize, y: usize) -> usize {
        y * self.width + x
    }

    pub fn sink(&self) -> usize {
        self.width * self.height
    }

    /// Cell reached by moving from `(x, y)` in direction `a`; walls block.
    pub fn neighbor(&self, x: usize, y: usize, a: usize) -> (usize, usize) {
        match a {
            0 if y + 1 < self.height => (x, y + 1),
            1 if x + 1 < self.width => (x + 1, y),
            2 if y > 0 => (x, y - 1),
            3 if x > 0 => (x - 1, y),
            _ => (x, y),
        }
    }

    /// Slip-free model and terminal mask.
    pub fn build(&self) -> Result<(TabularMdp, Vec<bool>)> {
        let in_grid = |(x, y): (usize, usize)| x < self.width && y < self.height;
        if self.width == 0 || self.height == 0 {
            return invalid("grid must be nonempty");
        }
        if !in_grid(self.start) || !in_grid(self.goal) || !self.pits.iter().copied().all(in_grid) {
            return invalid("grid coordinates out of range");
        }
        if self.pits.contains(&self.start) || self.pits.contains(&self.goal) || self.start == self.goal {
            return invalid("start, goal and pits must be distinct cells");
        }
        let n = self.n_states();
        let sink = self.sink();
        let mut p = vec![0.0; n * GRID_ACTIONS * n];
        let mut r = vec![0.0; n * GRID_ACTIONS];
        for s in 0..n {
            let (x, y) = (s % self.width, s / self.width);
            for a in 0..GRID_ACTIONS {
                let row = (s * GRID_ACTIONS + a) * n;
                if s == sink {
                    p[row + sink] = 1.0;
                } else if (x, y) == self.goal {
                    p[row + sink] = 1.0;
                    r[s * GRID_ACTIONS + a] = self.goal_reward;
                } else if self.pits.contains(&(x, y)) {
                    p[row + sink] = 1.0;
                    r[s * GRID_ACTIONS + a] = self.pit_reward;
                } else {
                    let (nx, ny) = self.neighbor(x, y, a);
                    p[row + self.cell(nx, ny)] = 1.0;
                    r[s * GRID_ACTIONS + a] = self.step_reward;
                }
            }
        }
        let mut init = vec![0.0; n];
        init[self.cell(self.start.0, self.start.1)] = 1.0;
        let mdp = TabularMdp::new(n, GRID_ACTIONS, p, r, self.gamma, init)?;
        let mut terminal = vec![false; n];
        terminal[sink] = true;
        Ok((mdp, terminal))
    }

    /// Slip family over this layout.
    pub fn family(
        &self,
        id: &str,
        omega_box: Vec<[f64; 2]>,
        nominal: Vec<f64>,
        horizon: usize,
    ) -> Result<TabularFamily> {
        let (mdp, terminal) = self.build()?;
        let kernel = KernelFamily::new(mdp, Perturbation::ActionSlip, 0, omega_box, nominal)
            .map_err(|e| Error::InvalidArgument(format!("{id}: {e}")))?;
        TabularFamily::new(id, kernel, terminal, horizon, None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::EnvFamily;

    #[test]
    fn nominal_construction_is_deterministic() {
        let fam = TabularFamily::slip_grid();
        let a = fam.env_at(fam.nominal_omega()).unwrap();
        let b = fam.env_at(fam.nominal_omega()).unwrap();
        assert_eq!(a.mdp(), b.mdp());
    }

    #[test]
    fn zero_slip_is_deterministic() {
        let fam = TabularFamily::slip_grid();
        let env = fam.env_at(&[0.0]).unwrap();
        let mdp = env.mdp();
        for s in 0..mdp.n_states() {
            for a in 0..mdp.n_actions() {
                let row = mdp.row(s, a);
                assert_eq!(row.iter().filter(|&&p| p == 1.0).count(), 1);
                assert_eq!(row.iter().filter(|&&p| p == 0.0).count(), row.len() - 1);
            }
        }
    }

    #[test]
    fn slip_moves_succeed_with_complement_probability() {
        let fam = TabularFamily::slip_grid();
        let env = fam.env_at(&[0.3]).unwrap();
        let layout_cell = |x: usize, y: usize| y * 8 + x;
        // Interior free cell (2, 4): each direction leads somewhere distinct.
        let s = layout_cell(2, 4);
        let up = env.mdp().row(s, 0);
        assert!((up[layout_cell(2, 5)] - 0.7).abs() < 1e-12);
        assert!((up[layout_cell(3, 4)] - 0.1).abs() < 1e-12);
        assert!((up[layout_cell(2, 3)] - 0.1).abs() < 1e-12);
        assert!((up[layout_cell(1, 4)] - 0.1).abs() < 1e-12);
    }

    #[test]
    fn every_grid_point_is_valid() {
        for fam in [
            TabularFamily::slip_grid(),
            TabularFamily::cliff_grid(),
            TabularFamily::windy_chain(),
        ] {
            let grid = crate::envs::OmegaGrid::uniform(fam.omega_box(), 10).unwrap();
            for omega in grid.points() {
                assert_eq!(fam.env_at(omega).unwrap().mdp().validate(), Ok(()));
            }
        }
    }

    #[test]
    fn chain_noise_component_is_not_in_the_kernel() {
        let fam = TabularFamily::windy_chain();
        let quiet = fam.env_at(&[0.2, 0.0]).unwrap();
        let noisy = fam.env_at(&[0.2, 0.5]).unwrap();
        assert_eq!(quiet.mdp(), noisy.mdp());
    }

    #[test]
    fn episodes_are_seed_deterministic() {
        let fam = TabularFamily::slip_grid();
        let run = |seed| {
            let mut env = fam.env_at(&[0.4]).unwrap();
            env.reset(seed);
            (0..50)
                .map(|t| env.step(&Action::Discrete(t % 4)).state)
                .collect::<Vec<_>>()
        };
        assert_eq!(run(5), run(5));
        assert_ne!(run(5), run(6));
    }

    #[test]
    fn expected_return_of_direct_route() {
        // Without slip, walking right along a pit-free row reaches the goal
        // after `width - 1` moves and one collection step.
        let layout = GridLayout {
            width: 4,
            height: 1,
            start: (0, 0),
            goal: (3, 0),
            pits: vec![],
            step_reward: -0.1,
            goal_reward: 1.0,
            pit_reward: -1.0,
            gamma: 0.9,
        };
        let fam = layout.family("line", vec![[0.0, 0.5]], vec![0.0], 10).unwrap();
        let env = fam.env_at(&[0.0]).unwrap();
        let pi = Policy::Deterministic(vec![1; 5]);
        assert!((env.expected_return(&pi).unwrap() - 0.7).abs() < 1e-12);
    }
}
