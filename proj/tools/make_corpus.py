#!/usr/bin/env python3
"""Writes the bundled synthetic house and the 12-participant transcript corpus.

Output layout (under --out, default data/synthetic):
  house/power.csv, house/tou.json, house/thresholds.json, house/comfort.json
  transcripts/P01.json .. P12.json
  config.json

Everything is deterministic for a given --seed.
"""

import argparse
import datetime as dt
import json
import random
from pathlib import Path

DAYS = 7
CADENCE = 15
START = dt.datetime(2026, 7, 6)

# appliance -> (active kW, comfort-associated)
APPLIANCES = {
    "ev_charger": (6.40, False),
    "hvac": (3.60, True),
    "pool_pump": (3.20, False),
    "electric_water_heater": (2.20, True),
    "oven": (1.70, True),
    "washing_machine": (0.85, False),
    "dishwasher": (0.82, False),
    "bedroom": (0.70, True),
    "clothes_dryer": (0.20, False),
}


def active_intervals(name, day, rng):
    """Set of (hour, quarter) slots in which the appliance runs on a given day."""
    on = set()

    def run(start_h, start_q, quarters):
        h, q = start_h, start_q
        for _ in range(quarters):
            if h < 24:
                on.add((h, q))
            q += 1
            if q == 4:
                h, q = h + 1, 0

    if name == "ev_charger":
        if day % 7 not in (5, 6):  # weekday evening charging after the commute
            run(rng.choice([17, 18, 19]), rng.randrange(4), rng.choice([6, 8, 10]))
        else:
            run(rng.choice([1, 2]), 0, 8)
    elif name == "hvac":
        for h in range(24):
            duty = 0.9 if 12 <= h < 22 else 0.45
            for q in range(4):
                if rng.random() < duty:
                    on.add((h, q))
    elif name == "pool_pump":
        run(rng.choice([9, 10, 11]), 0, rng.choice([20, 24, 28]))
    elif name == "electric_water_heater":
        run(rng.choice([6, 7]), rng.randrange(4), 3)
        run(rng.choice([18, 19, 20]), rng.randrange(4), 3)
    elif name == "oven":
        if rng.random() < 0.7:
            run(rng.choice([17, 18]), rng.randrange(4), rng.choice([3, 4]))
    elif name == "washing_machine":
        if day % 3 == 0:
            run(rng.choice([9, 10, 20]), 0, 4)
    elif name == "dishwasher":
        run(rng.choice([19, 20, 21]), rng.randrange(4), 6)
    elif name == "bedroom":
        run(21, 0, 8)
        run(6, 2, 3)
    elif name == "clothes_dryer":
        if day % 3 == 1:
            run(rng.choice([10, 15]), 0, 5)
    return on


def write_house(out, rng):
    house = out / "house"
    house.mkdir(parents=True, exist_ok=True)
    names = list(APPLIANCES)
    slots = {n: [active_intervals(n, d, rng) for d in range(DAYS)] for n in names}
    lines = ["timestamp," + ",".join(names)]
    t = START
    end = START + dt.timedelta(days=DAYS)
    while t < end:
        d = (t - START).days
        key = (t.hour, t.minute // CADENCE)
        row = [t.strftime("%Y-%m-%dT%H:%M")]
        for n in names:
            kw, _ = APPLIANCES[n]
            if n == "bedroom" and d == 2 and key == (3, 1):
                row.append("")  # one dropped meter reading
                continue
            if key in slots[n][d]:
                value = kw * rng.uniform(0.95, 1.05)
            else:
                value = rng.uniform(0.0, 0.02)  # standby draw
            row.append(f"{value:.3f}")
        lines.append(",".join(row))
        t += dt.timedelta(minutes=CADENCE)
    (house / "power.csv").write_text("\n".join(lines) + "\n")
    tou = [
        {"label": "off_peak", "start_hour": 0, "end_hour": 16, "rate_per_kwh": 0.12},
        {"label": "on_peak", "start_hour": 16, "end_hour": 21, "rate_per_kwh": 0.42},
        {"label": "off_peak", "start_hour": 21, "end_hour": 24, "rate_per_kwh": 0.12},
    ]
    (house / "tou.json").write_text(json.dumps(tou, indent=2) + "\n")
    (house / "thresholds.json").write_text(
        json.dumps({"floor_kw": 0.1, "fraction_of_max": 0.05}, indent=2) + "\n")
    comfort = {n: c for n, (_, c) in APPLIANCES.items()}
    (house / "comfort.json").write_text(json.dumps(comfort, indent=2) + "\n")


# Assistant replies reused across sessions. Word counts matter only for
# the first fixture, whose two replies are fixed below.
REPLIES = [
    "Your EV charger draws about 6.4 kW and runs mostly between 5 pm and 9 pm, which is the "
    "on-peak window at $0.42 per kWh. Charging the car after 9 pm or overnight at the $0.12 "
    "off-peak rate would cut that part of the bill by roughly 70 percent without changing how "
    "far you can drive.",
    "The HVAC unit is the largest energy driver at about 3.6 kW and it is active almost every "
    "hour between noon and 10 pm. Raising the thermostat setpoint by 1 to 2 F during on-peak "
    "hours, precooling the house before 4 pm, and using ceiling fans to keep you comfortable "
    "would lower on-peak consumption.",
    "The pool pump uses about 3.2 kW and its daily cycle often runs into the afternoon peak. "
    "Because pool filtration is flexible, you can schedule the pump to run in the morning "
    "off-peak hours and finish before 4 pm.",
    "Your electric water heater draws about 2.2 kW in short bursts in the morning and the "
    "evening. A timer that heats the tank before the on-peak window, or a slightly lower tank "
    "temperature, keeps hot water available while avoiding the higher rate.",
    "The dishwasher uses about 0.8 kW for roughly 90 minutes and often starts around 7 pm. "
    "Delaying the start until after 9 pm moves that load to the off-peak rate with no effect "
    "on comfort.",
    "Based on the frequency data, the oven and clothes dryer are used only a few times per "
    "week, so their savings potential is small compared with the EV charger, HVAC, and pool "
    "pump. The washing machine and bedroom circuit are low-power loads.",
    "Comparing the options, shifting EV charging gives the largest saving with no comfort "
    "impact, followed by the pool pump schedule. HVAC changes save energy too, but they "
    "affect comfort, so a small setpoint change combined with fans is the safest trade-off.",
    "If your schedule makes it hard to run appliances late, a delay-start timer on the "
    "dishwasher and a programmable thermostat let the loads shift automatically. An "
    "estimate for the month is about $35 to $50 in savings on your TOU bill.",
]

FIXTURE_REPLIES = [
    # The two replies total 210 words.
    "To reduce your monthly bill, focus on the appliances that draw the most power during the "
    "on-peak window from 4 pm to 9 pm. Your EV charger uses about 6.4 kW and charges in the "
    "early evening, so charging after 9 pm would move that load to the cheaper rate. The "
    "HVAC unit runs most afternoons at about 3.6 kW; raising the thermostat setpoint by 1 to 2 F "
    "during peak hours and using fans keeps you comfortable while saving energy. The pool pump "
    "can run in the morning instead of the afternoon, and the water heater can heat the tank "
    "before 4 pm each day.",
    "The appliances to shift first are the EV charger, the pool pump, and the electric water "
    "heater, because they use a lot of energy and their timing is flexible. Charging the car "
    "overnight saves the most, followed by running the pool pump between 8 am and 2 pm. A timer "
    "on the water heater avoids heating during peak hours. The dishwasher could also start "
    "after 9 pm, although its savings are smaller. For the HVAC system, combine a small setpoint "
    "increase with ceiling fans so comfort is not affected. Together these changes could lower "
    "your summer bill by roughly 20 to 30 percent overall.",
]

STRATEGY_SENTENCES = {
    "ev_charger_shift": "Charge the EV overnight during off-peak hours instead of the evening.",
    "hvac_setpoint_setback": "Raise the thermostat setpoint by 1-2 F during on-peak hours.",
    "hvac_pcs_coconditioning": "Use ceiling fans together with the HVAC so I stay comfortable.",
    "hvac_precooling": "Precool the house in the early afternoon before the peak starts.",
    "pool_pump_shift": "Run the pool pump in the morning off-peak hours.",
    "dishwasher_shift": "Start the dishwasher after 9 pm.",
    "water_heater_shift": "Schedule the water heater to heat the tank before 4 pm.",
}

USER_BANK = {
    "info": [
        "How can I reduce my electricity bill with this data?",
        "Which appliances use the most energy during the peak hours?",
        "What does the TOU rate mean for my costs in the evening?",
        "How often does the pool pump run each day?",
        "Could you estimate how much I would save per month?",
    ],
    "constraint": [
        "I can't charge the car late on Fridays because I work night shifts.",
        "I am sensitive to heat, so I don't want the house warmer than 76 F.",
        "My schedule means the dishwasher has to run after dinner around 8 pm.",
    ],
    "evaluation": [
        "Would precooling actually save money, or is it better to just raise the setpoint?",
        "Is that estimate realistic compared with my current bill of $210?",
        "Instead of a new thermostat, could a timer on the water heater be the better alternative?",
    ],
    "commitment": [
        "I will schedule the EV charger to start at 11 pm from now on.",
        "I'm willing to move the pool pump to the morning and try fans in the afternoon.",
        "I plan to set the dishwasher delay-start every night.",
    ],
    "technical": [
        "My heat pump is rated SEER 16 and the thermostat setpoint is 74 F; the tank is 50 gallons.",
        "The charger is level 2 at 32 A, so about 7 kW, and I use around 900 kWh per month.",
    ],
}

# id, domain knowledge, AI literacy, strategies named in the conclusion, user-turn recipe
PARTICIPANTS = [
    ("P01", 2.71, 1.25, None, None),  # fixture: fixed turns below
    ("P02", 2.14, 1.75, ["ev_charger_shift", "pool_pump_shift"], ["info:0", "info:1"]),
    ("P03", 2.43, 2.25, ["ev_charger_shift"], ["info:2", "info:4"]),
    ("P04", 2.57, 3.75,
     ["ev_charger_shift", "hvac_setpoint_setback", "hvac_pcs_coconditioning", "pool_pump_shift",
      "dishwasher_shift", "water_heater_shift"],
     ["info:0", "constraint:1", "evaluation:0", "commitment:1", "info:4"]),
    ("P05", 2.29, 4.00, list(STRATEGY_SENTENCES),
     ["info:1", "constraint:0", "evaluation:2", "commitment:0", "commitment:2"]),
    ("P06", 2.86, 4.25,
     ["ev_charger_shift", "hvac_setpoint_setback", "hvac_precooling", "pool_pump_shift",
      "dishwasher_shift"],
     ["info:0", "constraint:2", "evaluation:1", "commitment:2"]),
    ("P07", 4.43, 1.50,
     ["ev_charger_shift", "hvac_setpoint_setback", "water_heater_shift"],
     ["technical:0", "info:1", "info:3"]),
    ("P08", 3.86, 2.00, ["hvac_setpoint_setback", "pool_pump_shift"],
     ["technical:1", "info:0"]),
    ("P09", 4.14, 2.50, ["ev_charger_shift"], ["info:2", "technical:0"]),
    ("P10", 4.71, 3.50, list(STRATEGY_SENTENCES),
     ["technical:1", "constraint:1", "evaluation:0", "commitment:1", "info:4"]),
    ("P11", 4.00, 4.50,
     ["ev_charger_shift", "hvac_setpoint_setback", "hvac_pcs_coconditioning", "hvac_precooling",
      "pool_pump_shift", "water_heater_shift"],
     ["technical:0", "constraint:0", "evaluation:2", "commitment:0"]),
    ("P12", 4.29, 4.75,
     ["ev_charger_shift", "hvac_pcs_coconditioning", "hvac_precooling", "pool_pump_shift",
      "dishwasher_shift", "water_heater_shift"],
     ["info:1", "technical:1", "constraint:2", "evaluation:1", "commitment:2"]),
]

FIXTURE = {
    "session_id": "S01",
    "participant": {"id": "P01", "domain_knowledge": 2.71, "ai_literacy": 1.25},
    "turns": [
        {"role": "user", "text": "How can I reduce my monthly energy bill?"},
        {"role": "assistant", "text": FIXTURE_REPLIES[0]},
        {"role": "user", "text": "Which appliances should I shift to save the most?"},
        {"role": "assistant", "text": FIXTURE_REPLIES[1]},
    ],
    # Covers 4 of 5 target appliances (no dishwasher) and 5 of 7 strategies.
    "conclusion": " ".join(STRATEGY_SENTENCES[s] for s in [
        "ev_charger_shift", "hvac_setpoint_setback", "hvac_pcs_coconditioning", "pool_pump_shift",
        "water_heater_shift"]),
}


def transcript(pid, dk, al, strategies, recipe, rng):
    if recipe is None:
        return FIXTURE
    turns = []
    replies = REPLIES[:]
    rng.shuffle(replies)
    for i, item in enumerate(recipe):
        kind, idx = item.split(":")
        turns.append({"role": "user", "text": USER_BANK[kind][int(idx)]})
        turns.append({"role": "assistant", "text": replies[i % len(replies)]})
    return {
        "session_id": "S" + pid[1:],
        "participant": {"id": pid, "domain_knowledge": dk, "ai_literacy": al},
        "turns": turns,
        "conclusion": " ".join(STRATEGY_SENTENCES[s] for s in strategies),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="data/synthetic")
    ap.add_argument("--seed", type=int, default=20260706)
    args = ap.parse_args()
    out = Path(args.out)
    rng = random.Random(args.seed)
    write_house(out, rng)

    words = [len(t["text"].split()) for t in FIXTURE["turns"]]
    assert words[0] == 8 and words[2] == 9, words
    assert words[1] + words[3] == 210, words

    tdir = out / "transcripts"
    tdir.mkdir(parents=True, exist_ok=True)
    for pid, dk, al, strategies, recipe in PARTICIPANTS:
        doc = transcript(pid, dk, al, strategies, recipe, rng)
        (tdir / f"{pid}.json").write_text(json.dumps(doc, indent=2) + "\n")

    config = {
        "power_csv": "house/power.csv",
        "cadence_minutes": CADENCE,
        "tou": "house/tou.json",
        "thresholds": "house/thresholds.json",
        "comfort": "house/comfort.json",
        "transcripts_dir": "transcripts",
        "judge": {"model": "gpt-4o-mini", "temperature": 0, "max_in_flight": 4},
        "replay": {"store": "replay.json", "strict": True},
        "output_dir": "out",
    }
    (out / "config.json").write_text(json.dumps(config, indent=2) + "\n")


if __name__ == "__main__":
    main()
