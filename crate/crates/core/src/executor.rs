//! Message-passing executor for simulated processors.
//!
//! Every ordered pair of workers gets its own unbounded FIFO channel, so a
//! receive names its source and combine order never depends on arrival
//! time. Workers are `async` blocks: [`ExecMode::Simulated`] polls them all
//! on the calling thread, [`ExecMode::Threads`] gives each its own OS thread.
//!
//! Each worker carries a [`CommRecorder`]. Besides plain totals it keeps a
//! critical-path clock: sending bumps the sender's message and word clocks,
//! the message carries the bumped clock, and a receive takes the
//! component-wise maximum. The clock at the end of the run is the longest
//! dependency chain measured in messages, words and flops.

use std::future::Future;
use std::ops::AddAssign;
use std::sync::{Arc, Mutex};

use futures::channel::mpsc::{unbounded, UnboundedReceiver, UnboundedSender};
use futures::executor::block_on;
use futures::future::join_all;
use futures::StreamExt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flops::FlopCounter;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExecMode {
    #[default]
    Simulated,
    Threads,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathClock {
    pub flops: u64,
    pub messages: u64,
    pub words: u64,
}

impl PathClock {
    fn join(&mut self, other: &PathClock) {
        self.flops = self.flops.max(other.flops);
        self.messages = self.messages.max(other.messages);
        self.words = self.words.max(other.words);
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CommRecorder {
    pub sent_messages: u64,
    pub sent_words: u64,
    pub recv_messages: u64,
    pub recv_words: u64,
    pub flops: FlopCounter,
    pub critical: PathClock,
}

impl AddAssign<&CommRecorder> for CommRecorder {
    fn add_assign(&mut self, rhs: &CommRecorder) {
        self.sent_messages += rhs.sent_messages;
        self.sent_words += rhs.sent_words;
        self.recv_messages += rhs.recv_messages;
        self.recv_words += rhs.recv_words;
        self.flops += rhs.flops;
        self.critical.join(&rhs.critical);
    }
}

/// Totals over all workers; `critical` is the longest chain over all of them.
pub fn aggregate(recorders: &[CommRecorder]) -> CommRecorder {
    let mut total = CommRecorder::default();
    for r in recorders {
        total += r;
    }
    total
}

struct Envelope {
    payload: Vec<f64>,
    clock: PathClock,
}

/// One worker's endpoint.
pub struct Comm {
    id: usize,
    to: Vec<UnboundedSender<Envelope>>,
    from: Vec<UnboundedReceiver<Envelope>>,
    rec: Arc<Mutex<CommRecorder>>,
}

impl Comm {
    pub fn id(&self) -> usize {
        self.id
    }

    pub fn size(&self) -> usize {
        self.to.len()
    }

    pub fn send(&mut self, dst: usize, payload: Vec<f64>) -> Result<()> {
        let words = payload.len() as u64;
        let clock = {
            let mut r = self.rec.lock().expect("recorder poisoned");
            r.sent_messages += 1;
            r.sent_words += words;
            r.critical.messages += 1;
            r.critical.words += words;
            r.critical
        };
        self.to[dst]
            .unbounded_send(Envelope { payload, clock })
            .map_err(|_| Error::Executor(format!("worker {dst} is gone (send from {})", self.id)))
    }

    pub async fn recv(&mut self, src: usize) -> Result<Vec<f64>> {
        let env = self.from[src].next().await.ok_or_else(|| {
            Error::Executor(format!(
                "worker {src} hung up before sending to {}",
                self.id
            ))
        })?;
        let mut r = self.rec.lock().expect("recorder poisoned");
        r.recv_messages += 1;
        r.recv_words += env.payload.len() as u64;
        r.critical.join(&env.clock);
        Ok(env.payload)
    }

    /// Charges local work to this worker.
    pub fn compute(&mut self, work: FlopCounter) {
        let mut r = self.rec.lock().expect("recorder poisoned");
        r.flops += work;
        r.critical.flops += work.flops;
    }

    pub fn recorder(&self) -> CommRecorder {
        self.rec.lock().expect("recorder poisoned").clone()
    }
}

/// What a run hands back per worker.
#[derive(Debug)]
pub struct WorkerResult<T> {
    pub value: T,
    pub recorder: CommRecorder,
}

fn comms(p: usize) -> (Vec<Comm>, Vec<Arc<Mutex<CommRecorder>>>) {
    let mut tx: Vec<Vec<Option<UnboundedSender<Envelope>>>> =
        (0..p).map(|_| vec![None; p]).collect();
    let mut rx: Vec<Vec<Option<UnboundedReceiver<Envelope>>>> =
        (0..p).map(|_| (0..p).map(|_| None).collect()).collect();
    for src in 0..p {
        for dst in 0..p {
            let (s, r) = unbounded();
            tx[src][dst] = Some(s);
            rx[dst][src] = Some(r);
        }
    }
    let recs: Vec<_> = (0..p)
        .map(|_| Arc::new(Mutex::new(CommRecorder::default())))
        .collect();
    let comms = tx
        .into_iter()
        .zip(rx)
        .enumerate()
        .map(|(id, (to, from))| Comm {
            id,
            to: to.into_iter().map(Option::unwrap).collect(),
            from: from.into_iter().map(Option::unwrap).collect(),
            rec: recs[id].clone(),
        })
        .collect();
    (comms, recs)
}

/// Runs `p` workers to completion. The first failing worker (by id) decides
/// the error, preferring a worker's own failure over the hang-ups it causes.
pub fn run<T, F, Fut>(p: usize, mode: ExecMode, worker: F) -> Result<Vec<WorkerResult<T>>>
where
    T: Send,
    F: Fn(Comm) -> Fut + Sync,
    Fut: Future<Output = Result<T>> + Send,
{
    if p == 0 {
        return Err(Error::Executor("no workers".into()));
    }
    let (comms, recs) = comms(p);
    let outcomes: Vec<Result<T>> = match mode {
        ExecMode::Simulated => block_on(join_all(comms.into_iter().map(&worker))),
        ExecMode::Threads => std::thread::scope(|s| {
            let handles: Vec<_> = comms
                .into_iter()
                .map(|c| {
                    let fut = worker(c);
                    s.spawn(move || block_on(fut))
                })
                .collect();
            handles
                .into_iter()
                .enumerate()
                .map(|(i, h)| {
                    h.join()
                        .unwrap_or_else(|_| Err(Error::Executor(format!("worker {i} panicked"))))
                })
                .collect()
        }),
    };
    let is_hangup = |e: &Error| matches!(e, Error::Executor(m) if m.contains("hung up") || m.contains("is gone"));
    let mut values = Vec::with_capacity(p);
    let mut errors = Vec::new();
    for o in outcomes {
        match o {
            Ok(v) => values.push(v),
            Err(e) => errors.push(e),
        }
    }
    if !errors.is_empty() {
        let at = errors.iter().position(|e| !is_hangup(e)).unwrap_or(0);
        return Err(errors.swap_remove(at));
    }
    Ok(values
        .into_iter()
        .zip(recs)
        .map(|(value, rec)| WorkerResult {
            value,
            recorder: rec.lock().expect("recorder poisoned").clone(),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(mode: ExecMode) -> Vec<WorkerResult<f64>> {
        run(4, mode, |mut c| async move {
            let p = c.size();
            let me = c.id();
            c.compute(FlopCounter { flops: 10, divs: 0 });
            c.send((me + 1) % p, vec![me as f64; 3])?;
            let got = c.recv((me + p - 1) % p).await?;
            Ok(got[0])
        })
        .unwrap()
    }

    #[test]
    fn ring_exchange_in_both_modes() {
        for mode in [ExecMode::Simulated, ExecMode::Threads] {
            let out = ring(mode);
            let vals: Vec<_> = out.iter().map(|w| w.value).collect();
            assert_eq!(vals, vec![3.0, 0.0, 1.0, 2.0]);
            for w in &out {
                assert_eq!((w.recorder.sent_messages, w.recorder.sent_words), (1, 3));
                assert_eq!(w.recorder.critical.messages, 1);
            }
        }
    }

    #[test]
    fn chain_clock_counts_hops() {
        let out = run(4, ExecMode::Simulated, |mut c| async move {
            let me = c.id();
            if me > 0 {
                c.recv(me - 1).await?;
            }
            if me + 1 < c.size() {
                c.send(me + 1, vec![0.0; 2])?;
            }
            Ok(())
        })
        .unwrap();
        assert_eq!(out[3].recorder.critical.messages, 3);
        assert_eq!(out[3].recorder.critical.words, 6);
        assert_eq!(
            aggregate(&out.iter().map(|w| w.recorder.clone()).collect::<Vec<_>>()).sent_messages,
            3
        );
    }

    #[test]
    fn failing_worker_surfaces_its_own_error() {
        let err = run(3, ExecMode::Simulated, |mut c| async move {
            if c.id() == 1 {
                return Err(Error::Dimension("boom".into()));
            }
            c.recv(1).await?;
            Ok(())
        })
        .unwrap_err();
        assert!(matches!(err, Error::Dimension(_)));
    }
}
