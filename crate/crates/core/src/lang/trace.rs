use serde::Serialize;

use super::step::Config;

/// An execution history; the last configuration is the current one.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Trace {
    configs: Vec<Config>,
}

impl Trace {
    pub fn new(init: Config) -> Self {
        Trace {
            configs: vec![init],
        }
    }

    pub fn curr(&self) -> &Config {
        self.configs.last().expect("traces are nonempty")
    }

    /// Number of steps taken so far.
    pub fn steps(&self) -> usize {
        self.configs.len() - 1
    }

    pub fn configs(&self) -> &[Config] {
        &self.configs
    }

    pub fn push(&mut self, c: Config) {
        self.configs.push(c);
    }

    /// Removes the last configuration; the initial one is never removed.
    pub fn pop(&mut self) -> Option<Config> {
        if self.configs.len() > 1 {
            self.configs.pop()
        } else {
            None
        }
    }

    pub fn extended(&self, c: Config) -> Trace {
        let mut t = self.clone();
        t.push(c);
        t
    }
}
