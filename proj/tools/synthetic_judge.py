#!/usr/bin/env python3
"""Deterministic stand-in for a chat-completion judge.

Serves POST /v1/chat/completions and answers the two prompt kinds the
pipeline sends: concept scoring (four rubric factors) and conclusion
matching. Replies depend only on the request text, so recording a corpus
through this server is reproducible. It is a keyword heuristic, not a model.
"""

import argparse
import json
import re
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

CONCEPT_KEYWORDS = {
    "information_seeking": ["?", "how ", "what ", "which ", "could you", "can you", "estimate"],
    "constraint_articulation": ["can't", "cannot", "i work", "sensitive", "don't want",
                                "my schedule", "has to"],
    "solution_evaluation": ["instead", "would ", "is that", "trade-off", "alternative",
                            "better", "realistic", "compar"],
    "commitment_expression": ["i will", "i'll", "i'm willing", "i am willing", "i plan",
                              "from now on"],
    "appliance_energy_use": ["kw", "kwh", "draws", "uses about", "consumption"],
    "cost_awareness": ["bill", "cost", "rate", "$", "saving", "cheaper"],
    "behavioral_change": ["shift", "schedule", "move", "delay", "raise", "run the", "start"],
    "appliance_use_flexibility": ["flexible", "shift", "delay", "instead of", "automatically"],
    "appliance_use_frequency": ["frequency", "how often", "times per", "every hour", "per week",
                                "each day"],
    "comfort_association": ["comfort", "heat", "warmer", "fans", "hot water"],
    "technical_knowledge": ["setpoint", "thermostat", "precool", "heat pump", "seer", "tank",
                            "level 2", "filtration"],
}

STRATEGY_KEYWORDS = {
    "hvac_pcs_coconditioning": ["fan"],
    "hvac_setpoint_setback": ["setpoint"],
    "hvac_precooling": ["precool"],
    "pool_pump_shift": ["pool pump"],
    "ev_charger_shift": ["ev ", "electric vehicle", "charger"],
    "dishwasher_shift": ["dishwasher"],
    "water_heater_shift": ["water heater"],
}

APPLIANCE_KEYWORDS = {
    "ev_charger": ["ev ", "charger", "car"],
    "hvac": ["hvac", "thermostat", "setpoint", "precool"],
    "pool_pump": ["pool"],
    "electric_water_heater": ["water heater"],
    "dishwasher": ["dishwasher"],
}


def level(count):
    return min(5, count) / 5


def score_concept(prompt):
    concept = re.search(r"^CONCEPT: .*\((\w+)\)$", prompt, re.M).group(1)
    excerpt = prompt.split("CONVERSATION EXCERPT", 1)[1].split("\nSTEPS:", 1)[0]
    turns = [t.lower() for t in re.findall(r"^\[\d+\] (.*)$", excerpt, re.M)]
    keys = CONCEPT_KEYWORDS.get(concept, [concept.replace("_", " ")])
    hits = sum(t.count(k) for t in turns for k in keys)
    turns_hit = sum(1 for t in turns if any(k in t for k in keys))
    distinct = sum(1 for k in keys if any(k in t for t in turns))
    numbers = sum(len(re.findall(r"\d", t)) for t in turns if any(k in t for k in keys))
    reply = {
        "explicitness": level(hits),
        "depth": level(2 * turns_hit),
        "consideration": level(distinct + turns_hit),
        "evidence": level(numbers // 2),
        "justification": f"{hits} keyword hits in {turns_hit} of {len(turns)} turns",
    }
    return json.dumps(reply)


def judge_conclusion(prompt):
    targets = re.findall(r"^- (\w+)$",
                         prompt.split("REFERENCE TARGET APPLIANCES:", 1)[1]
                         .split("REFERENCE STRATEGIES:", 1)[0], re.M)
    strategies = re.findall(r"^- \[(\w+)\] \((\w+)\)", prompt, re.M)
    text = prompt.split("<<<\n", 1)[1].split("\n>>>", 1)[0].lower() + " "
    out = {"appliances": {}, "strategies": {}}
    for sid, appliance in strategies:
        keys = STRATEGY_KEYWORDS.get(sid, [appliance.replace("_", " ")])
        hit = next((k for k in keys if k in text), None)
        out["strategies"][sid] = {
            "match": hit is not None,
            "justification": f"mentions '{hit.strip()}'" if hit else "no matching recommendation",
        }
    for a in targets:
        keys = APPLIANCE_KEYWORDS.get(a, [a.replace("_", " ")])
        hit = next((k for k in keys if k in text), None)
        out["appliances"][a] = {
            "match": hit is not None,
            "justification": f"mentions '{hit.strip()}'" if hit else "appliance not addressed",
        }
    return "Here is my assessment.\n" + json.dumps(out)


class Handler(BaseHTTPRequestHandler):
    def do_POST(self):
        if not self.path.endswith("/chat/completions"):
            self.send_error(404)
            return
        body = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
        prompt = body["messages"][-1]["content"]
        if "REFERENCE TARGET APPLIANCES:" in prompt:
            content = judge_conclusion(prompt)
        else:
            content = score_concept(prompt)
        payload = json.dumps({
            "id": "synthetic",
            "object": "chat.completion",
            "model": body.get("model", ""),
            "choices": [{"index": 0, "finish_reason": "stop",
                         "message": {"role": "assistant", "content": content}}],
        }).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def log_message(self, *args):
        pass


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--port", type=int, default=18089)
    args = ap.parse_args()
    ThreadingHTTPServer(("127.0.0.1", args.port), Handler).serve_forever()


if __name__ == "__main__":
    main()
