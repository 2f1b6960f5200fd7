#!/usr/bin/env python3

# SPDX-FileCopyrightText: 2024 noise-fingerprint developers
#
# SPDX-License-Identifier: GPL-3.0-or-later

"""Synthetic populations, FAR/FRR sweeps and forged-probe attacks.

Every random draw comes from a PCG64 generator seeded through a
SeedSequence built from explicit integers, so all numbers are reproducible
and independent of how trials are scheduled.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from dataclasses import field
import copy
import json
import logging
import math
import os

import jsonschema
import numpy as np
import yaml

from noise_fingerprint.config import DEFAULT_TAIL_FRACTION
from noise_fingerprint.config import DEFAULT_THRESHOLD
from noise_fingerprint.config import MIN_TAIL_SAMPLES
from noise_fingerprint.exception import ConfigError
from noise_fingerprint.exception import DomainError
from noise_fingerprint.exception import EmptySeriesError
from noise_fingerprint.exception import ModalityError
from noise_fingerprint.exception import PopulationError
from noise_fingerprint.exception import TooShortError
from noise_fingerprint.extraction import MODALITIES
from noise_fingerprint.extraction import MODALITY_EYE_X
from noise_fingerprint.extraction import MODALITY_EYE_Y
from noise_fingerprint.extraction import MODALITY_FACE
from noise_fingerprint.extraction import MODALITY_FINGERPRINT
from noise_fingerprint.extraction import NoiseSeries
from noise_fingerprint.extraction import check_modality
from noise_fingerprint.matching import build_template
from noise_fingerprint.matching import fuse
from noise_fingerprint.matching import fused_score
from noise_fingerprint.matching import match_score
from noise_fingerprint.matching import prepare_probe
from noise_fingerprint.matching import score_probe
from noise_fingerprint.stats import moments

SCRIPT_DIR = os.path.dirname(os.path.realpath(__file__))
SIMULATION_SCHEMA = os.path.join(SCRIPT_DIR, "var", "simulation-schema.json")
DEFAULT_SIMULATION_CONFIG = os.path.join(SCRIPT_DIR, "var", "simulate-default.yml")

ATTACK_REPLAY = "replay"
ATTACK_NAIVE_GAUSSIAN = "naive_gaussian"
ATTACK_RANDOM = "random"
ATTACK_KINDS = [ ATTACK_REPLAY, ATTACK_NAIVE_GAUSSIAN, ATTACK_RANDOM ]

MIN_ATTACK_TRIALS = 100

# draw seed 0 enrolls, 1.. are probes; observations use their own range
OBSERVATION_DRAW_SEED = 1_000_000

DEFAULT_THRESHOLDS = tuple(np.linspace(0.0, 1.0, 101).tolist())


@dataclass(frozen=True)
class ModalityParams:
    """Gaussian core N(core_mean, core_sd) mixed with a wider N(core_mean, tail_scale * core_sd)."""

    core_mean: float
    core_sd: float
    tail_weight: float = 0.0
    tail_scale: float = 1.0

    def __post_init__(self):
        for name in ("core_mean", "core_sd", "tail_weight", "tail_scale"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(name + " must be finite")
        if self.core_sd <= 0:
            raise DomainError("core_sd must be > 0, got " + str(self.core_sd))
        if not 0.0 <= self.tail_weight <= 0.2:
            raise DomainError("tail_weight must lie in [0, 0.2], got " + str(self.tail_weight))
        if self.tail_scale < 1.0:
            raise DomainError("tail_scale must be >= 1, got " + str(self.tail_scale))


@dataclass(frozen=True)
class SyntheticUserSpec:
    seed: int
    modalities: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0 <= self.seed < 2 ** 64:
            raise DomainError("User seed must be a 64-bit unsigned integer, got " + str(self.seed))
        for modality in self.modalities:
            check_modality(modality)

    def params(self, modality):
        if modality not in self.modalities:
            raise ModalityError("User " + str(self.seed) + " has no " + str(modality) + " parameters")
        return self.modalities[modality]


@dataclass(frozen=True)
class AttackSpec:
    kind: str
    observation: NoiseSeries

    def __post_init__(self):
        if self.kind not in ATTACK_KINDS:
            raise DomainError("Unknown attack \"" + str(self.kind) + "\". Supported: " + str(ATTACK_KINDS))
        if len(self.observation) == 0:
            raise EmptySeriesError("Attack observation is empty")


@dataclass(frozen=True)
class RocResult:
    thresholds: tuple
    far: tuple
    frr: tuple
    eer: float
    auc: float
    genuine_trials: int = 0
    impostor_trials: int = 0


@dataclass(frozen=True)
class SimulationResult:
    roc: RocResult
    attacks: dict


def make_generator(*entropy):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(e) for e in entropy])))


def generate_series(spec, modality, n, draw_seed=0):
    if n < MIN_TAIL_SAMPLES:
        raise TooShortError("Synthetic series need at least " + str(MIN_TAIL_SAMPLES) + " draws, got " + str(n))
    params = spec.params(modality)
    rng = make_generator(spec.seed, MODALITIES.index(modality), draw_seed)
    heavy = rng.random(n) < params.tail_weight
    scale = np.where(heavy, params.tail_scale * params.core_sd, params.core_sd)
    return NoiseSeries.from_values(modality, params.core_mean + scale * rng.standard_normal(n))


def _check_thresholds(thresholds):
    if thresholds is None:
        thresholds = DEFAULT_THRESHOLDS
    thresholds = np.unique(np.asarray(thresholds, dtype=np.float64))
    if thresholds.size == 0:
        raise DomainError("Threshold sweep is empty")
    if thresholds[0] < 0.0 or thresholds[-1] > 1.0:
        raise DomainError("Sweep thresholds must lie in [0, 1]")
    return thresholds


def _equal_error_rate(far, frr):
    gap = far - frr
    crossed = np.flatnonzero(gap <= 0)
    if crossed.size == 0:
        return float((far[-1] + frr[-1]) / 2.0)
    i = int(crossed[0])
    if i == 0:
        return float((far[0] + frr[0]) / 2.0)
    t = gap[i - 1] / (gap[i - 1] - gap[i])
    return float(far[i - 1] + t * (far[i] - far[i - 1]))


def roc_sweep(genuine_scores, impostor_scores, thresholds=None):
    """FAR / FRR per threshold, EER by linear interpolation, AUC by trapezoid."""
    genuine = np.asarray(genuine_scores, dtype=np.float64)
    impostor = np.asarray(impostor_scores, dtype=np.float64)
    if genuine.size == 0 or impostor.size == 0:
        raise EmptySeriesError("ROC sweep needs genuine and impostor scores")
    thresholds = _check_thresholds(thresholds)
    far = np.array([np.mean(impostor >= t) for t in thresholds])
    frr = np.array([np.mean(genuine < t) for t in thresholds])

    # rising threshold walks the curve from (1, 1) towards (0, 0)
    x = np.concatenate(([0.0], far[::-1], [1.0]))
    y = np.concatenate(([0.0], (1.0 - frr)[::-1], [1.0]))
    auc = float(np.sum((x[1:] - x[:-1]) * (y[1:] + y[:-1]) / 2.0))

    return RocResult(tuple(thresholds.tolist()), tuple(far.tolist()), tuple(frr.tolist()),
                     _equal_error_rate(far, frr), auc, int(genuine.size), int(impostor.size))


def _map(workers, fun, items):
    items = list(items)
    if workers <= 1:
        return [fun(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(fun, items))


def enroll_user(spec, user_id, modalities, enroll_n, tail_fraction=DEFAULT_TAIL_FRACTION):
    return {modality: build_template(user_id, modality, generate_series(spec, modality, enroll_n, 0),
                                     tail_fraction)
            for modality in modalities}


def run_protocol(population, enroll_n, probe_n, probes_per_user, thresholds=None,
                 modalities=None, tail_fraction=DEFAULT_TAIL_FRACTION, workers=1):
    """Genuine and impostor fused scores over a synthetic population.

    Every user enrolls each modality once; each fresh probe set is scored
    against the user's own templates (genuine) and every other user's
    templates (impostor). A trial's fused score is its weakest modality.
    """
    population = list(population)
    if len(population) < 2:
        raise PopulationError("A protocol run needs at least 2 users, got " + str(len(population)))
    if enroll_n < MIN_TAIL_SAMPLES or probe_n < MIN_TAIL_SAMPLES:
        raise TooShortError("Enrollment and probe sizes must be >= " + str(MIN_TAIL_SAMPLES))
    if probes_per_user < 1:
        raise DomainError("probes_per_user must be >= 1")
    if modalities is None:
        modalities = [ MODALITY_FINGERPRINT, MODALITY_FACE, MODALITY_EYE_Y ]
    users = range(len(population))

    templates = _map(workers, lambda u: enroll_user(population[u], "user" + str(u), modalities,
                                                     enroll_n, tail_fraction), users)

    def _user_trials(u):
        genuine = []
        impostor = []
        for p in range(probes_per_user):
            probe = {modality: prepare_probe(generate_series(population[u], modality, probe_n, p + 1),
                                             tail_fraction)
                     for modality in modalities}
            for v in users:
                score = fused_score([score_probe(templates[v][m], probe[m]) for m in modalities])
                if v == u:
                    genuine.append(score)
                else:
                    impostor.append(score)
        return genuine, impostor

    trials = _map(workers, _user_trials, users)
    genuine = [score for user_genuine, _ in trials for score in user_genuine]
    impostor = [score for _, user_impostor in trials for score in user_impostor]
    logging.debug("Protocol: " + str(len(genuine)) + " genuine and " + str(len(impostor))
                  + " impostor trials")
    return roc_sweep(genuine, impostor, thresholds)


def forge_probe(attack, rng, n):
    """Draw n forged values from what the attacker observed."""
    observed = attack.observation.values
    if attack.kind == ATTACK_REPLAY:
        values = rng.choice(observed, size=n, replace=True)
    elif attack.kind == ATTACK_NAIVE_GAUSSIAN:
        fit = moments(observed)
        values = rng.normal(fit.mean, fit.sd, n)
    else:
        values = rng.uniform(float(observed.min()), float(observed.max()), n)
    return NoiseSeries.from_values(attack.observation.modality, values)


def _check_trials(trials):
    if trials < MIN_ATTACK_TRIALS:
        raise DomainError("At least " + str(MIN_ATTACK_TRIALS) + " trials needed, got " + str(trials))


def run_attack(template, attack, trials=MIN_ATTACK_TRIALS, threshold=DEFAULT_THRESHOLD, probe_n=None,
               seed=0):
    """Fraction of forged probes the victim's template accepts."""
    _check_trials(trials)
    if attack.observation.modality != template.modality:
        raise ModalityError("Observation of " + attack.observation.modality + " used against a "
                            + template.modality + " template")
    if probe_n is None:
        probe_n = len(attack.observation)
    accepted = 0
    for trial in range(trials):
        rng = make_generator(seed, ATTACK_KINDS.index(attack.kind), trial)
        if match_score(template, forge_probe(attack, rng, probe_n), threshold).accepted:
            accepted += 1
    rate = accepted / trials
    logging.debug("Attack " + attack.kind + " on " + template.modality + ": " + str(rate))
    return rate


def run_fused_attack(templates, observations, kind, trials=MIN_ATTACK_TRIALS, threshold=DEFAULT_THRESHOLD,
                     probe_n=None, seed=0, eye_modality=MODALITY_EYE_Y):
    """Fraction of trials where forged probes pass all three modalities at once."""
    _check_trials(trials)
    modalities = [ MODALITY_FINGERPRINT, MODALITY_FACE, eye_modality ]
    attacks = {m: AttackSpec(kind, observations[m]) for m in modalities}
    accepted = 0
    for trial in range(trials):
        reports = []
        for index, modality in enumerate(modalities):
            rng = make_generator(seed, ATTACK_KINDS.index(kind), trial, index + 1)
            n = probe_n if probe_n is not None else len(observations[modality])
            reports.append(match_score(templates[modality], forge_probe(attacks[modality], rng, n), threshold))
        if fuse(*reports, eye_modality=eye_modality).authenticated:
            accepted += 1
    return accepted / trials


def genuine_acceptance(spec, templates, probe_n, trials=MIN_ATTACK_TRIALS, threshold=DEFAULT_THRESHOLD,
                       eye_modality=MODALITY_EYE_Y):
    """Fused acceptance rate of fresh genuine probes, the baseline attacks are compared with."""
    modalities = [ MODALITY_FINGERPRINT, MODALITY_FACE, eye_modality ]
    accepted = 0
    for trial in range(trials):
        reports = [match_score(templates[m], generate_series(spec, m, probe_n, trial + 1), threshold)
                   for m in modalities]
        if fuse(*reports, eye_modality=eye_modality).authenticated:
            accepted += 1
    return accepted / trials


#
# Configuration driven simulation
#

def _merge(base, override):
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def _read_yaml(path):
    try:
        with open(path, 'r') as f:
            data = yaml.safe_load(f)
    except yaml.YAMLError as e:
        raise ConfigError("Simulation config is not valid YAML: " + str(path) + " (" + str(e) + ")")
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("Simulation config must be a key-value mapping: " + str(path))
    return data


def load_config(path=None):
    """Read a simulation config, fill in bundled defaults and validate it."""
    config = _read_yaml(DEFAULT_SIMULATION_CONFIG)
    if path is not None:
        config = _merge(config, _read_yaml(path))
    with open(SIMULATION_SCHEMA, 'r') as f:
        schema = json.load(f)
    try:
        jsonschema.validate(instance=config, schema=schema)
    except jsonschema.exceptions.ValidationError as exc:
        raise ConfigError("Invalid simulation config: " + exc.message)
    logging.debug("Simulation config: " + str(config))
    return config


def eye_modality_of(config):
    for modality in (MODALITY_EYE_Y, MODALITY_EYE_X):
        if modality in config["modalities"]:
            return modality
    raise ConfigError("Simulation config needs eye_y or eye_x parameters")


def population_from_config(config):
    eye = eye_modality_of(config)
    spacing = 0.0 if config["identical_users"] else float(config["spacing_sd"])
    population = []
    for u in range(config["users"]):
        modalities = {}
        for modality in (MODALITY_FINGERPRINT, MODALITY_FACE, eye):
            p = config["modalities"][modality]
            modalities[modality] = ModalityParams(p["core_mean"] + u * spacing * p["core_sd"], p["core_sd"],
                                                  p["tail_weight"], p["tail_scale"])
        population.append(SyntheticUserSpec(config["seed"] + u, modalities))
    return population


def run_simulation(config, workers=None):
    """Protocol sweep plus the attack comparison described by a config."""
    if workers is None:
        workers = config["workers"]
    eye = eye_modality_of(config)
    modalities = [ MODALITY_FINGERPRINT, MODALITY_FACE, eye ]
    population = population_from_config(config)
    sweep = config["thresholds"]
    thresholds = np.linspace(sweep["start"], sweep["stop"], sweep["steps"])
    roc = run_protocol(population, config["enroll_n"], config["probe_n"], config["probes_per_user"],
                       thresholds, modalities, config["tail_fraction"], workers)

    attack = config["attack"]
    attacks = {}
    if attack["kinds"]:
        victim = attack["victim"]
        if not 0 <= victim < len(population):
            raise PopulationError("Attack victim " + str(victim) + " is not in the population")
        spec = population[victim]
        templates = enroll_user(spec, "user" + str(victim), modalities, config["enroll_n"],
                                config["tail_fraction"])
        observations = {m: generate_series(spec, m, attack["observation_n"], OBSERVATION_DRAW_SEED)
                        for m in modalities}
        threshold = attack["threshold"]
        attacks["genuine"] = genuine_acceptance(spec, templates, attack["probe_n"], attack["trials"],
                                                threshold, eye)
        for kind in attack["kinds"]:
            for modality in modalities:
                attacks[kind + "." + modality] = run_attack(templates[modality],
                                                            AttackSpec(kind, observations[modality]),
                                                            attack["trials"], threshold, attack["probe_n"],
                                                            config["seed"])
            attacks[kind] = run_fused_attack(templates, observations, kind, attack["trials"], threshold,
                                             attack["probe_n"], config["seed"], eye)
    return SimulationResult(roc, attacks)


def _num(value):
    return "%.12g" % value


def write_results(result, stream, extra=None):
    """Sweep rows as `threshold,far,frr` followed by `# key=value` footer lines."""
    roc = result.roc
    print("threshold,far,frr", file=stream)
    for threshold, far, frr in zip(roc.thresholds, roc.far, roc.frr):
        print(_num(threshold) + "," + _num(far) + "," + _num(frr), file=stream)
    print("# eer=" + _num(roc.eer), file=stream)
    print("# auc=" + _num(roc.auc), file=stream)
    print("# genuine_trials=" + str(roc.genuine_trials), file=stream)
    print("# impostor_trials=" + str(roc.impostor_trials), file=stream)
    for key in sorted(result.attacks):
        print("# attack." + key + "=" + _num(result.attacks[key]), file=stream)
    for key, value in (extra or {}).items():
        print("# " + key + "=" + str(value), file=stream)
