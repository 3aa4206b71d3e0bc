#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
"""Writes the evaluation fixtures under data/: run logs the battery tools read,
battery files, mock scripts and the replayed transcripts for the error-rate
table and the prompt ablation. Rerun after changing any table below."""
import json
import sys
from pathlib import Path

ROOT = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parents[2] / "data"
ASU = "Arizona State University, Tempe Campus"
ASU_BBOX = [-111.9431, 33.4154, -111.9239, 33.428]
TRIALS = 20


def call(tool, **params):
    return "Thought: the request needs " + tool + ".\n" + json.dumps({"action": tool, "action_input": params})


FINAL = json.dumps({"action": "final", "answer": "Done, see the result above."})

# Comparison battery: task id -> (utterance, tool, params, wrong tool call, failing call)
TASKS = {
    "1": ("Run a SUMO simulation of the map file osm/asu.osm.", "simulateOnSUMO", {"network": "osm/asu.osm"},
          call("simulateOnDLSim", network="osm/asu.osm"), call("simulateOnSUMO", network="osm/missing.osm")),
    "2": ("Show " + ASU + " on the map.", "showOnMap", {"place": ASU},
          call("queryAreaRange", place=ASU), call("showOnMap", place="Arizona State Universty Tempe Campuss")),
    "3": ("Compare the logs in runs/fixedtime and runs/sotl.", "logAnalyzer",
          {"log": "runs/fixedtime", "compare": "runs/sotl"},
          call("resultExplainer", metrics="runs/sotl"), call("logAnalyzer", log="runs/fixedtime.xml")),
    "4": ("Plot the training curves of runs/qlearning.", "visualizeTrainingCurves", {"curve": "runs/qlearning"},
          call("logAnalyzer", log="runs/qlearning"), call("visualizeTrainingCurves", curve="runs/missing")),
    "5": ("Run SOTL signal control on Libsignal.", "simulateOnLibsignal", {"algorithm": "sotl"},
          call("simulateOnSUMO", network="osm/asu.osm"), call("simulateOnLibsignal", algorithm="fixedtime")),
    "6": ("Explain the results in runs/sotl.", "resultExplainer", {"metrics": "runs/sotl"},
          call("logAnalyzer", log="runs/sotl"), call("resultExplainer", metrics="runs/none")),
}
PROSE = {
    "1": "SUMO is a microscopic simulator; you can open the map in sumo-gui and press play.",
    "2": "Arizona State University is in Tempe, Arizona, east of downtown Phoenix.",
    "3": "Fixed-time control usually has longer waits than SOTL under uneven demand.",
    "4": "Training curves usually rise quickly and then flatten out.",
    "5": "SOTL switches a light once enough cars have waited on red.",
    "6": "The results show how long vehicles took and how many finished.",
}

# Error-rate table: per task (no API call, mismatch, error raise) counts out of 20.
TABLE = {
    "openti": {"1": (0, 0, 1), "2": (0, 0, 1), "3": (0, 1, 1), "4": (0, 0, 2), "5": (1, 0, 1), "6": (1, 0, 0)},
    "trafficgpt": {"1": (0, 1, 2), "2": (1, 0, 0), "3": (3, 1, 2), "4": (1, 2, 3), "5": (1, 0, 2), "6": (2, 0, 2)},
}


def spread(labels):
    """Failures at trial slots 3, 10, 17, 4, ... (step 7 visits every slot once)."""
    out = ["ok"] * TRIALS
    for i, l in enumerate(x for x in labels if x != "ok"):
        out[(3 + 7 * i) % TRIALS] = l
    return out


def trial(task, label):
    utter, tool, params, wrong, failing = TASKS[task]
    if label == "ok":
        c = [call(tool, **params), FINAL]
    elif label == "no_api_call":
        c = [PROSE[task]]
    elif label == "mismatch":
        c = [wrong, FINAL]
    else:
        c = [failing, FINAL] if task == "5" else [failing]
    return {"label": label, "completions": c}


def replay_table(column):
    trials = {}
    for task, (no, miss, err) in TABLE[column].items():
        labels = spread(["no_api_call"] * no + ["mismatch"] * miss + ["error_raise"] * err)
        trials[task] = [trial(task, l) for l in labels]
    return {"system": column, "trials": trials}


# Ablation: accuracy per mask step (none, -Emphasis, ... -Description) and task.
ABL_TASKS = ["queryAreaRange", "showOnMap", "autoDownloadOpenStreetMapFile", "simulateOnLibsignal"]
ACCURACY = {
    "queryAreaRange":                [1.00, 0.95, 0.95, 0.95, 0.95, 0.90],
    "showOnMap":                     [0.95, 0.90, 0.90, 0.65, 0.20, 0.10],
    "autoDownloadOpenStreetMapFile": [0.95, 0.90, 0.90, 0.85, 0.30, 0.20],
    "simulateOnLibsignal":           [0.95, 0.95, 0.80, 0.25, 0.20, 0.10],
}
ABL_UTTER = {
    "queryAreaRange": ("Where is " + ASU + "?", {"place": ASU}),
    "showOnMap": ("Show " + ASU + " on the map.", {"place": ASU}),
    "autoDownloadOpenStreetMapFile": ("Download the OpenStreetMap file of " + ASU + ".", {"bbox": ASU_BBOX}),
    "simulateOnLibsignal": ("Run fixed-time signal control on Libsignal.", {"algorithm": "fixedtime"}),
}
# Failure shape per removed component: mismatch when tools blur together,
# wrong input without reflection or format rules, skipped steps without examples.
ABL_FAIL = {
    "queryAreaRange": ("mismatch", [call("showOnMap", place=ASU), FINAL]),
    "showOnMap": ("error_raise", [call("showOnMap", bbox="ASU campus")]),
    "autoDownloadOpenStreetMapFile": ("mismatch", [call("queryAreaRange", place=ASU), FINAL]),
    "simulateOnLibsignal": ("error_raise", [call("simulateOnLibsignal", algorithm="webster")]),
}


def abl_ok(task):
    if task == "autoDownloadOpenStreetMapFile":
        return [call("queryAreaRange", place=ASU), call(task, bbox=ASU_BBOX), FINAL]
    return [call(task, **ABL_UTTER[task][1]), FINAL]


def replay_ablation():
    trials = {}
    for task in ABL_TASKS:
        for step, acc in enumerate(ACCURACY[task]):
            bad = TRIALS - round(acc * TRIALS)
            labels = spread(["fail"] * bad)
            label, completions = ABL_FAIL[task]
            trials[f"{step}/{task}"] = [
                {"label": "ok", "completions": abl_ok(task)} if l == "ok" else
                {"label": label, "completions": completions} for l in labels]
    return {"system": "openti", "trials": trials}


def dump(path, doc):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=1) + "\n")


def write_runs():
    runs = {
        "fixedtime": {"att_s": 76.5, "throughput": 1078, "avg_queue": 6.8, "avg_delay_s": 31.2, "total_reward": -2450},
        "sotl": {"att_s": 68.0, "throughput": 1084, "avg_queue": 4.4, "avg_delay_s": 22.7, "total_reward": -1590},
        "qlearning": {"att_s": 70.3, "throughput": 1082, "avg_queue": 5.1, "avg_delay_s": 25.0, "total_reward": -1840},
    }
    for name, m in runs.items():
        dump(ROOT / "runs" / name / "metrics.json", dict(m, per_link_counts={}))
    rows = ["episode,total_reward,att_s,throughput,avg_queue,avg_delay_s"]
    for ep in range(10):
        reward = -2400 + ep * 62
        att = 79.0 - ep * 0.97
        rows.append(f"{ep},{reward},{att:.2f},{1070 + ep},{6.9 - ep * 0.2:.2f},{33.5 - ep * 0.95:.2f}")
    (ROOT / "runs" / "qlearning" / "training_curve.csv").write_text("\n".join(rows) + "\n")


def write_batteries():
    comp = [{"task_id": t, "utterance": u, "expected_tool": tool, "expected_params": p}
            for t, (u, tool, p, _, _) in TASKS.items()]
    dump(ROOT / "battery" / "comparison.json", comp)
    abl = [{"task_id": t, "utterance": ABL_UTTER[t][0], "expected_tool": t, "expected_params": ABL_UTTER[t][1]}
           for t in ABL_TASKS]
    dump(ROOT / "battery" / "ablation.json", abl)


KEYS = {"1": "SUMO simulation", "2": "on the map", "3": "Compare the logs", "4": "training curves",
        "5": "SOTL signal control", "6": "Explain the results"}


def write_mocks():
    correct = [{"pattern": KEYS[t], "responses": [call(tool, **p), FINAL]} for t, (_, tool, p, _, _) in TASKS.items()]
    dump(ROOT / "mock" / "battery_correct.json", correct)
    # Hand-labelled adversarial script: two tasks per abnormal class.
    plan = {"1": "no_api_call", "2": "no_api_call", "3": "mismatch", "4": "mismatch", "5": "error_raise",
            "6": "error_raise"}
    adv = [{"pattern": KEYS[t], "responses": trial(t, label)["completions"]} for t, label in plan.items()]
    dump(ROOT / "mock" / "battery_adversarial.json", adv)
    dump(ROOT / "mock" / "battery_adversarial_labels.json", plan)


if __name__ == "__main__":
    write_runs()
    write_batteries()
    write_mocks()
    dump(ROOT / "replay" / "error_rates_openti.json", replay_table("openti"))
    dump(ROOT / "replay" / "error_rates_trafficgpt.json", replay_table("trafficgpt"))
    dump(ROOT / "replay" / "ablation.json", replay_ablation())
