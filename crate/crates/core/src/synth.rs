//! Deterministic synthetic cohort: layout, assessment, gaze logs,
//! timelines and responses for a class of readers drawn from four reading
//! archetypes.

use std::f64::consts::PI;
use std::fs;
use std::io::BufWriter;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ingest::{
    write_gaze_log, write_responses, AoiKind, AoiLayout, AoiRegion, AssessmentContent, BBox, GazeSample, Interval,
    PageEvent, Question, QuestionEvent, SessionTimeline, Standard, StudentResponse,
};

pub const COHORT_SIZE: usize = 46;
pub const N_LINES: usize = 40;
pub const LINES_PER_PAGE: [usize; 3] = [14, 13, 13];
pub const SAMPLE_RATE_HZ: f64 = 60.0;

const LINE_X0: f64 = 60.0;
const LINE_X1: f64 = 980.0;
const LINE_Y0: f64 = 60.0;
const LINE_PITCH: f64 = 42.0;
const LINE_HEIGHT: f64 = 30.0;
const PAGE_BOX: [f64; 4] = [40.0, 40.0, 1000.0, 664.0];
const QUIZ_BOX: [f64; 4] = [1040.0, 40.0, 1500.0, 664.0];

pub const PASSAGE: &str = "In the early nineteen hundreds, women in the United States could not vote in most \
national elections. Many people believed that politics belonged to men and that women should stay out of \
public life. A growing group of activists disagreed. They argued that a democracy could not call itself fair \
while half of its citizens had no voice.

The movement for women's suffrage had begun decades earlier. In 1848, reformers met in Seneca Falls, New York, \
and wrote a declaration that demanded equal rights, including the right to vote. For the next seventy years, \
supporters gave speeches, wrote newspaper articles, and collected signatures on petitions. Progress was slow. \
Some western territories, such as Wyoming, allowed women to vote long before the rest of the country did.

By the 1910s, a new generation of leaders changed their tactics. Some organized large parades in major cities. \
Others stood silently outside the White House holding signs that asked the president how long women must wait \
for liberty. Several of these protesters were arrested. In prison, some refused to eat, and news of their harsh \
treatment turned many readers into supporters.

The First World War also shifted public opinion. Women took jobs in factories, offices, and hospitals while men \
served overseas. It became harder to claim that women were unable to take part in national affairs when they \
were helping to keep the nation running.

In 1919, Congress passed the Nineteenth Amendment, which stated that the right to vote could not be denied \
because of sex. The amendment then needed approval from three quarters of the states. The final vote came in \
Tennessee in August 1920, where a young legislator changed his mind after reading a letter from his mother. With \
that single vote, the amendment became law.

The victory did not reach everyone equally. Many Black women in the South, as well as Native American and Asian \
American women, still faced unfair barriers at the polls for decades. Even so, the Nineteenth Amendment remains \
one of the largest expansions of voting rights in American history.";

/// Words of [`PASSAGE`] split into [`N_LINES`] nearly equal lines.
pub fn passage_lines() -> Vec<Vec<&'static str>> {
    let words: Vec<&str> = PASSAGE.split_whitespace().collect();
    let base = words.len() / N_LINES;
    let extra = words.len() % N_LINES;
    let mut out = Vec::with_capacity(N_LINES);
    let mut at = 0;
    for i in 0..N_LINES {
        let n = base + usize::from(i < extra);
        out.push(words[at..at + n].to_vec());
        at += n;
    }
    out
}

/// Page, row on that page, and global reading index of each line.
fn line_slots() -> Vec<(u32, usize)> {
    let mut v = Vec::with_capacity(N_LINES);
    for (p, &n) in LINES_PER_PAGE.iter().enumerate() {
        for r in 0..n {
            v.push((p as u32 + 1, r));
        }
    }
    v
}

fn line_box(row: usize) -> BBox {
    let y0 = LINE_Y0 + LINE_PITCH * row as f64;
    BBox::from([LINE_X0, y0, LINE_X1, y0 + LINE_HEIGHT])
}

pub fn synth_layout() -> AoiLayout {
    let lines = passage_lines();
    let mut regions = Vec::new();
    for p in 1..=LINES_PER_PAGE.len() as u32 {
        regions.push(AoiRegion {
            id: format!("page_{p}"),
            kind: AoiKind::PassagePage,
            page: p,
            bbox: BBox::from(PAGE_BOX),
            line_index: None,
            word_count: None,
        });
    }
    for (i, (page, row)) in line_slots().into_iter().enumerate() {
        regions.push(AoiRegion {
            id: format!("line_{:02}", i + 1),
            kind: AoiKind::PassageLine,
            page,
            bbox: line_box(row),
            line_index: Some(row as u32 + 1),
            word_count: Some(lines[i].len() as u32),
        });
    }
    regions.push(AoiRegion {
        id: "quiz_panel".into(),
        kind: AoiKind::QuizPanel,
        page: 0,
        bbox: BBox::from(QUIZ_BOX),
        line_index: None,
        word_count: None,
    });
    AoiLayout::new(regions).expect("synthetic layout is valid")
}

pub fn synth_assessment() -> AssessmentContent {
    let standards = [
        (
            "RI.7.1",
            "Cite text evidence that supports what the text says directly and what it implies.",
        ),
        (
            "RI.7.2",
            "Find the central ideas of a text, trace how they develop, and summarize them objectively.",
        ),
        (
            "RI.7.3",
            "Analyze how people, events, and ideas in a text influence one another.",
        ),
        (
            "RI.7.4",
            "Work out the meaning of words and phrases as they are used in the text.",
        ),
        ("RI.7.5", "Analyze how the organization of a text supports its ideas."),
        ("RI.7.6", "Identify the author's point of view or purpose."),
    ];
    let questions: [(&str, &str, &[&str]); 16] = [
        ("What is the main purpose of the text?", "B", &["RI.7.2", "RI.7.6"]),
        (
            "Which detail shows that the movement started long before 1920?",
            "A",
            &["RI.7.1"],
        ),
        ("What happened at Seneca Falls in 1848?", "C", &["RI.7.1"]),
        (
            "What does the word \"suffrage\" mean as used in the passage?",
            "D",
            &["RI.7.4"],
        ),
        ("Why does the author mention Wyoming?", "A", &["RI.7.3"]),
        (
            "How did the tactics of activists change in the 1910s?",
            "B",
            &["RI.7.3"],
        ),
        (
            "What effect did news of the prisoners' treatment have on readers?",
            "C",
            &["RI.7.1", "RI.7.3"],
        ),
        (
            "How did the First World War influence public opinion?",
            "A",
            &["RI.7.3"],
        ),
        (
            "What does \"tactics\" most nearly mean in the third paragraph?",
            "D",
            &["RI.7.4"],
        ),
        ("What did the Nineteenth Amendment state?", "B", &["RI.7.1"]),
        ("Why was the vote in Tennessee important?", "C", &["RI.7.3"]),
        ("How is the passage mainly organized?", "A", &["RI.7.5"]),
        (
            "Which sentence best states a central idea of the last paragraph?",
            "D",
            &["RI.7.2"],
        ),
        (
            "What can the reader infer about women who could not vote after 1920?",
            "B",
            &["RI.7.1"],
        ),
        (
            "What is the author's view of the amendment's importance?",
            "C",
            &["RI.7.6"],
        ),
        ("Which summary of the passage is the most objective?", "A", &["RI.7.2"]),
    ];
    AssessmentContent {
        title: "Votes for Women".into(),
        passage_text: PASSAGE.to_string(),
        questions: questions
            .iter()
            .enumerate()
            .map(|(i, (text, correct, codes))| Question {
                id: format!("q{}", i + 1),
                text: text.to_string(),
                options: ["A", "B", "C", "D"].iter().map(|s| s.to_string()).collect(),
                correct_option: correct.to_string(),
                standard_codes: codes.iter().map(|s| s.to_string()).collect(),
            })
            .collect(),
        standards: standards
            .iter()
            .map(|(code, d)| Standard {
                code: code.to_string(),
                description: d.to_string(),
            })
            .collect(),
        fluency_skills: vec!["reading rate".into(), "accuracy".into(), "phrasing".into()],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Archetype {
    Fluent,
    Careful,
    Skimmer,
    Struggling,
}

impl Archetype {
    pub const ALL: [Archetype; 4] = [
        Archetype::Fluent,
        Archetype::Careful,
        Archetype::Skimmer,
        Archetype::Struggling,
    ];

    fn profile(self) -> Profile {
        match self {
            Archetype::Fluent => Profile {
                fix_dur_s: 0.21,
                step_words: 1.4,
                regression_p: 0.04,
                skip_line_p: 0.0,
                wander_p: 0.01,
                y_noise_px: 3.0,
                quiz_fixations: 7.0,
                lookback_p: 0.25,
                ability: 1.4,
            },
            Archetype::Careful => Profile {
                fix_dur_s: 0.28,
                step_words: 1.0,
                regression_p: 0.12,
                skip_line_p: 0.0,
                wander_p: 0.02,
                y_noise_px: 3.0,
                quiz_fixations: 11.0,
                lookback_p: 0.7,
                ability: 1.0,
            },
            Archetype::Skimmer => Profile {
                fix_dur_s: 0.19,
                step_words: 2.1,
                regression_p: 0.03,
                skip_line_p: 0.4,
                wander_p: 0.03,
                y_noise_px: 4.0,
                quiz_fixations: 5.0,
                lookback_p: 0.1,
                ability: -0.2,
            },
            Archetype::Struggling => Profile {
                fix_dur_s: 0.34,
                step_words: 0.8,
                regression_p: 0.25,
                skip_line_p: 0.08,
                wander_p: 0.1,
                y_noise_px: 6.0,
                quiz_fixations: 14.0,
                lookback_p: 0.35,
                ability: -0.8,
            },
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Profile {
    fix_dur_s: f64,
    step_words: f64,
    regression_p: f64,
    skip_line_p: f64,
    wander_p: f64,
    y_noise_px: f64,
    quiz_fixations: f64,
    lookback_p: f64,
    ability: f64,
}

impl Profile {
    /// Per-student variation around the archetype.
    fn perturbed(self, rng: &mut ChaCha8Rng) -> Profile {
        let mut f = |v: f64, rel: f64| v * (1.0 + rel * (rng.random::<f64>() * 2.0 - 1.0));
        Profile {
            fix_dur_s: f(self.fix_dur_s, 0.1),
            step_words: f(self.step_words, 0.1),
            regression_p: f(self.regression_p, 0.2),
            skip_line_p: f(self.skip_line_p, 0.2),
            wander_p: f(self.wander_p, 0.2),
            y_noise_px: self.y_noise_px,
            quiz_fixations: f(self.quiz_fixations, 0.15),
            lookback_p: f(self.lookback_p, 0.2),
            ability: self.ability,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub n_students: usize,
    pub seed: u64,
    pub cold_read_cap_s: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_students: COHORT_SIZE,
            seed: 7,
            cold_read_cap_s: 120.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthStudent {
    pub id: String,
    pub archetype: Archetype,
    pub samples: Vec<GazeSample>,
    pub timeline: SessionTimeline,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthCohort {
    pub layout: AoiLayout,
    pub assessment: AssessmentContent,
    pub students: Vec<SynthStudent>,
    pub responses: Vec<StudentResponse>,
}

struct Sim {
    rng: ChaCha8Rng,
    dt: f64,
    t: f64,
    pos: Option<(f64, f64)>,
    samples: Vec<GazeSample>,
    jitter: Normal<f64>,
}

impl Sim {
    fn new(rng: ChaCha8Rng) -> Self {
        Sim {
            rng,
            dt: 1.0 / SAMPLE_RATE_HZ,
            t: 0.0,
            pos: None,
            samples: Vec::new(),
            jitter: Normal::new(0.0, 0.7).expect("valid sigma"),
        }
    }

    fn emit(&mut self, x: f64, y: f64) {
        let t = self.samples.len() as f64 * self.dt;
        self.samples
            .push(GazeSample::valid(t, x.clamp(0.0, 1527.0), y.clamp(0.0, 703.0)));
        self.t = self.samples.len() as f64 * self.dt;
    }

    fn emit_invalid(&mut self) {
        let t = self.samples.len() as f64 * self.dt;
        self.samples.push(GazeSample::invalid(t));
        self.t = self.samples.len() as f64 * self.dt;
    }

    /// Saccade to `(x, y)` then hold for about `dur_s`.
    fn fixate(&mut self, x: f64, y: f64, dur_s: f64) {
        if let Some((px, py)) = self.pos {
            if (x - px).hypot(y - py) > 1.0 {
                self.emit((x + px) / 2.0, (y + py) / 2.0);
            }
        }
        self.pos = Some((x, y));
        let n = (dur_s.max(0.1) / self.dt).round() as usize;
        let blink = self.rng.random::<f64>();
        // short blinks get interpolated, long ones split the fixation
        let (blink_len, blink_at) = if blink < 0.03 {
            (self.rng.random_range(2..=4), n / 2)
        } else if blink < 0.04 {
            (10, n / 2)
        } else {
            (0, 0)
        };
        for i in 0..n {
            if blink_len > 0 && i >= blink_at && i < blink_at + blink_len {
                self.emit_invalid();
            } else {
                let (jx, jy) = (self.jitter.sample(&mut self.rng), self.jitter.sample(&mut self.rng));
                self.emit(x + jx, y + jy);
            }
        }
    }

    fn duration(&mut self, mean: f64) -> f64 {
        let sd = mean * 0.25;
        (mean + sd * Normal::new(0.0, 1.0).expect("unit normal").sample(&mut self.rng)).clamp(0.1, 3.0 * mean)
    }
}

fn line_y(row: usize) -> f64 {
    LINE_Y0 + LINE_PITCH * row as f64 + LINE_HEIGHT / 2.0
}

fn word_x(pos_words: f64, n_words: usize) -> f64 {
    let w = (LINE_X1 - LINE_X0) / n_words as f64;
    LINE_X0 + (pos_words + 0.5) * w
}

fn simulate_student(id: String, archetype: Archetype, index: usize, cfg: &SynthConfig) -> SynthStudent {
    let seed = cfg
        .seed
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(index as u64 + 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let prof = archetype.profile().perturbed(&mut rng);
    let mut sim = Sim::new(rng);
    let lines = passage_lines();
    let slots = line_slots();
    let mut page_events = vec![PageEvent { t_s: 0.0, page: 1 }];
    let y_noise = Normal::new(0.0, prof.y_noise_px).expect("valid sigma");
    let mut current_page = 1;

    'reading: for (i, &(page, row)) in slots.iter().enumerate() {
        if page != current_page {
            current_page = page;
            page_events.push(PageEvent { t_s: sim.t, page });
        }
        if sim.rng.random::<f64>() < prof.skip_line_p {
            continue;
        }
        let n_words = lines[i].len();
        let mut w = sim.rng.random::<f64>() * 0.6;
        while w < n_words as f64 - 0.3 {
            if sim.t >= cfg.cold_read_cap_s {
                break 'reading;
            }
            let dy = y_noise.sample(&mut sim.rng).clamp(-12.0, 12.0);
            let d = sim.duration(prof.fix_dur_s);
            sim.fixate(word_x(w, n_words), line_y(row) + dy, d);
            if sim.rng.random::<f64>() < prof.wander_p {
                let x = sim.rng.random_range(PAGE_BOX[0] + 5.0..PAGE_BOX[2] - 5.0);
                let y = sim.rng.random_range(PAGE_BOX[1] + 5.0..PAGE_BOX[3] - 5.0);
                let d = sim.duration(prof.fix_dur_s);
                sim.fixate(x, y, d);
            }
            let step = if sim.rng.random::<f64>() < prof.regression_p && w > 1.0 {
                -(1.0 + sim.rng.random::<f64>())
            } else {
                (prof.step_words * (1.0 + 0.3 * (sim.rng.random::<f64>() * 2.0 - 1.0))).max(0.6)
            };
            w += step;
        }
    }
    let cold_end = sim.t;

    // brief pause while the questions load
    let d = 0.6;
    sim.fixate(1270.0, 352.0, d);
    let qa_start = sim.t;

    let mut question_events = Vec::new();
    let n_questions = 16;
    for q in 0..n_questions {
        let shown = sim.t;
        let n_quiz = (prof.quiz_fixations * (0.7 + 0.6 * sim.rng.random::<f64>()))
            .round()
            .max(2.0) as usize;
        let look_at = sim.rng.random_range(1..n_quiz);
        for k in 0..n_quiz {
            let x = sim.rng.random_range(QUIZ_BOX[0] + 20.0..QUIZ_BOX[2] - 20.0);
            let y = sim.rng.random_range(QUIZ_BOX[1] + 20.0..QUIZ_BOX[3] - 20.0);
            let d = sim.duration(0.25);
            sim.fixate(x, y, d);
            if k == look_at && sim.rng.random::<f64>() < prof.lookback_p {
                let target = (q * 5 + 2) % N_LINES;
                let (page, _) = slots[target];
                if page != current_page {
                    current_page = page;
                    page_events.push(PageEvent { t_s: sim.t, page });
                }
                let n_look = sim.rng.random_range(3..=8);
                for j in 0..n_look {
                    let li = (target + j / 3).min(N_LINES - 1);
                    let (p, row) = slots[li];
                    if p != current_page {
                        break;
                    }
                    let nw = lines[li].len();
                    let w = sim.rng.random::<f64>() * (nw as f64 - 1.0);
                    let dy = y_noise.sample(&mut sim.rng).clamp(-12.0, 12.0);
                    let d = sim.duration(prof.fix_dur_s);
                    sim.fixate(word_x(w, nw), line_y(row) + dy, d);
                }
            }
        }
        question_events.push(QuestionEvent {
            question_id: format!("q{}", q + 1),
            shown_s: shown,
            answered_s: sim.t,
        });
    }
    let qa_end = sim.t;

    SynthStudent {
        timeline: SessionTimeline {
            student_id: id.clone(),
            cold_read: Interval::new(0.0, cold_end),
            qa: Interval::new(qa_start, qa_end),
            question_events,
            page_events,
        },
        id,
        archetype,
        samples: sim.samples,
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn simulate_responses(students: &[SynthStudent], assessment: &AssessmentContent, seed: u64) -> Vec<StudentResponse> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x0005_EED0_FA11);
    let nq = assessment.questions.len();
    let difficulty: Vec<f64> = (0..nq).map(|i| -1.5 + 3.0 * i as f64 / (nq - 1) as f64).collect();
    let noise = Normal::new(0.0, 0.4).expect("valid sigma");
    let mut out = Vec::with_capacity(students.len() * nq);
    for s in students {
        let ability = s.archetype.profile().ability + noise.sample(&mut rng);
        // spread hard items through the test rather than at the end
        for (qi, q) in assessment.questions.iter().enumerate() {
            let diff = difficulty[(qi * 7) % nq];
            let correct = rng.random::<f64>() < sigmoid(ability - diff);
            let chosen = if correct {
                q.correct_option.clone()
            } else {
                let wrong: Vec<&String> = q.options.iter().filter(|o| **o != q.correct_option).collect();
                wrong[rng.random_range(0..wrong.len())].clone()
            };
            let latency = s
                .timeline
                .question_events
                .iter()
                .find(|e| e.question_id == q.id)
                .map_or(0.0, |e| e.answered_s - e.shown_s);
            out.push(StudentResponse {
                student_id: s.id.clone(),
                question_id: q.id.clone(),
                chosen_option: chosen,
                correct,
                latency_s: (latency * 1000.0).round() / 1000.0,
            });
        }
    }
    out
}

pub fn student_id(index: usize) -> String {
    format!("{:03}", index + 1)
}

/// Archetypes are dealt round-robin, so a 46-student cohort has groups of
/// 12, 12, 11 and 11.
pub fn generate_cohort(cfg: &SynthConfig) -> SynthCohort {
    let layout = synth_layout();
    let assessment = synth_assessment();
    let students: Vec<SynthStudent> = (0..cfg.n_students)
        .into_par_iter()
        .map(|i| simulate_student(student_id(i), Archetype::ALL[i % 4], i, cfg))
        .collect();
    let responses = simulate_responses(&students, &assessment, cfg.seed);
    SynthCohort {
        layout,
        assessment,
        students,
        responses,
    }
}

fn io_err(e: impl std::fmt::Display) -> std::io::Error {
    std::io::Error::other(e.to_string())
}

/// Writes the cohort in the on-disk dataset layout:
/// `gaze/{id}.csv`, `timeline/{id}.json`, `aoi_layout.json`,
/// `assessment.json`, `responses.csv`, plus `archetypes.json` (ground truth).
pub fn write_dataset(cohort: &SynthCohort, dir: &Path) -> std::io::Result<()> {
    fs::create_dir_all(dir.join("gaze"))?;
    fs::create_dir_all(dir.join("timeline"))?;
    fs::write(dir.join("aoi_layout.json"), cohort.layout.to_json_string())?;
    fs::write(
        dir.join("assessment.json"),
        serde_json::to_string_pretty(&cohort.assessment).map_err(io_err)?,
    )?;
    write_responses(
        BufWriter::new(fs::File::create(dir.join("responses.csv"))?),
        &cohort.responses,
    )?;
    cohort.students.par_iter().try_for_each(|s| -> std::io::Result<()> {
        write_gaze_log(
            BufWriter::new(fs::File::create(dir.join("gaze").join(format!("{}.csv", s.id)))?),
            &s.samples,
        )?;
        fs::write(
            dir.join("timeline").join(format!("{}.json", s.id)),
            serde_json::to_string_pretty(&s.timeline).map_err(io_err)?,
        )
    })?;
    let truth: std::collections::BTreeMap<&str, Archetype> =
        cohort.students.iter().map(|s| (s.id.as_str(), s.archetype)).collect();
    fs::write(
        dir.join("archetypes.json"),
        serde_json::to_string_pretty(&truth).map_err(io_err)?,
    )
}

/// A 60 Hz trace with three stationary clusters of 500 ms (±2 px jitter)
/// joined by two 3-sample jumps of 300 px. Returns the samples and the
/// cluster centres.
pub fn three_fixation_trace(seed: u64) -> (Vec<GazeSample>, [(f64, f64); 3]) {
    let centers = [(400.0, 350.0), (700.0, 350.0), (1000.0, 350.0)];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dt = 1.0 / SAMPLE_RATE_HZ;
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for (c, &(cx, cy)) in centers.iter().enumerate() {
        if c > 0 {
            let (px, _) = centers[c - 1];
            // bell-shaped velocity: small first and last steps
            for f in [0.1, 0.5, 0.9] {
                pts.push((px + f * (cx - px), cy));
            }
        }
        for _ in 0..30 {
            pts.push((cx + rng.random_range(-2.0..=2.0), cy + rng.random_range(-2.0..=2.0)));
        }
    }
    let samples = pts
        .into_iter()
        .enumerate()
        .map(|(i, (x, y))| GazeSample::valid(i as f64 * dt, x, y))
        .collect();
    (samples, centers)
}

/// Two concentric rings (radii 1 and 5) with small radial noise, labelled
/// 0 (inner) and 1 (outer).
pub fn concentric_rings(n_per_ring: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Vec::with_capacity(2 * n_per_ring);
    let mut truth = Vec::with_capacity(2 * n_per_ring);
    for (label, radius) in [(0usize, 1.0f64), (1, 5.0)] {
        for i in 0..n_per_ring {
            let a = 2.0 * PI * i as f64 / n_per_ring as f64 + rng.random_range(-0.05..0.05);
            let r = radius + rng.random_range(-0.1..0.1);
            data.push(vec![r * a.cos(), r * a.sin()]);
            truth.push(label);
        }
    }
    (data, truth)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn passage_fills_forty_lines() {
        let lines = passage_lines();
        assert_eq!(lines.len(), N_LINES);
        assert!(lines.iter().all(|l| l.len() >= 8));
        let total: usize = lines.iter().map(Vec::len).sum();
        assert_eq!(total, PASSAGE.split_whitespace().count());
    }

    #[test]
    fn layout_counts() {
        let l = synth_layout();
        assert_eq!(l.line_count(), 40);
        assert_eq!(l.count_of(AoiKind::PassagePage), 3);
        assert_eq!(l.count_of(AoiKind::QuizPanel), 1);
    }

    #[test]
    fn assessment_is_valid() {
        let a = synth_assessment();
        a.validate().unwrap();
        assert_eq!(a.questions.len(), 16);
    }

    #[test]
    fn small_cohort_is_deterministic() {
        let cfg = SynthConfig {
            n_students: 4,
            seed: 3,
            cold_read_cap_s: 30.0,
        };
        let a = generate_cohort(&cfg);
        let b = generate_cohort(&cfg);
        assert_eq!(a, b);
        assert_eq!(a.responses.len(), 4 * 16);
        for s in &a.students {
            s.timeline.validate().unwrap();
            assert!(s.timeline.cold_read.end_s <= 31.0);
        }
    }

    #[test]
    fn three_fixation_trace_shape() {
        let (s, c) = three_fixation_trace(1);
        assert_eq!(s.len(), 96);
        assert_eq!(c.len(), 3);
    }
}
