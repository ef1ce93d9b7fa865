#!/usr/bin/env python3
"""Builds the replay fixture: a 5-item QA set and a 4-task action set over six
screens, plus recordings.jsonl holding the model completion for every prompt
an evaluation with --shots 1 --seed 7 sends.

Usage: gen_replay.py path/to/screenchat

The prompts are obtained from the CLI's `prompt` subcommand so the recording
keys are exactly what `eval` will look up. Item i of a run uses seed 7 + i.

Hand-computed scores for the authored completions:
  qa   exact 3/5, contains 1/5, sub-string 0/5, micro-F1 10/13
  act  7 steps, 5 correct -> partial 500/7 %, 2 of 4 tasks complete -> 50 %
"""

import hashlib
import json
import pathlib
import subprocess
import sys

FIXTURES = pathlib.Path(__file__).resolve().parent.parent
ROOT = FIXTURES / "replay"
SEED, SHOTS = 7, 1

CLASSES = {
    "p": "android.widget.TextView",
    "button": "android.widget.Button",
    "img": "android.widget.ImageView",
    "input": "android.widget.EditText",
    "div": "android.view.View",
}

# screen id -> (package, [(tag, resource name, text, content-desc)])
SCREENS = {
    "weather_home": ("com.bloom.weather", [
        ("p", "app_title", "Bloom Weather", None),
        ("p", "condition", "Sunny", None),
        ("p", "temperature", "21°C", None),
        ("img", "radar_icon", None, "Radar"),
        ("button", "settings_button", "Settings", None),
        ("input", "city_search", None, "Search city"),
    ]),
    "weather_about": ("com.bloom.weather", [
        ("button", "back_button", None, "Navigate up"),
        ("p", "about_title", "About", None),
        ("p", "version_label", "Version", None),
        ("p", "version_value", "2.7.3", None),
        ("button", "licenses_button", "Open source licenses", None),
    ]),
    "cart_list": ("com.shop.cart", [
        ("p", "toolbar_title", "Your cart", None),
        ("p", "item_name", "Running shoes", None),
        ("p", "delivery_day", "Tomorrow", None),
        ("button", "remove_button", None, "Remove item"),
        ("button", "checkout_button", "Checkout", None),
    ]),
    "cart_checkout": ("com.shop.cart", [
        ("p", "toolbar_title", "Checkout", None),
        ("input", "card_number", None, "Card number"),
        ("input", "expiry_date", None, "Expiry date"),
        ("button", "pay_button", "Pay now", None),
        ("button", "cancel_button", "Cancel", None),
    ]),
    "mail_inbox": ("net.mail.inbox", [
        ("img", "avatar_image", None, "Account"),
        ("p", "folder_title", "Inbox", None),
        ("p", "unread_count_textView", "3", None),
        ("p", "subject", "Lunch on Friday?", None),
        ("button", "compose_fab", None, "Compose"),
        ("button", "profile_tab", "Profile", None),
    ]),
    "mail_compose": ("net.mail.inbox", [
        ("input", "to_field", None, "To"),
        ("input", "subject_field", None, "Subject"),
        ("input", "body_field", None, "Message"),
        ("button", "send_button", None, "Send"),
    ]),
}

# (screen, question, ground truth, completion after "A:")
QA = [
    ("weather_home", "What is the app name?", "Bloom Weather", " <SOA>Bloom Weather<EOA>"),
    ("weather_home", "What is the weather like?", "Sunny", " <SOA>sunny<EOA>"),
    ("cart_list", "Which day is delivery?", "Tomorrow", " <SOA>Tomorrow.<EOA>"),
    ("weather_about", "What version is installed?", "2.7.3", " <SOA>version 2.7.3<EOA>"),
    ("mail_inbox", "Where can I change preferences?", "Settings", " <SOA>Profile<EOA>"),
]

# task id, package, [(screen, instruction, gold, completion after "id=")]
TASKS = [
    ("weather-settings", "com.bloom.weather", [
        ("weather_home", "Open settings.", 4, "<SOI>4<EOI>"),
        ("weather_about", "Go back.", 0, "<SOI>0<EOI>"),
    ]),
    ("cart-pay", "com.shop.cart", [
        ("cart_list", "Go to checkout.", 4, "<SOI>4<EOI>"),
        ("cart_checkout", "Pay for the order.", 3, "<SOI>4<EOI>"),
    ]),
    ("mail-compose", "net.mail.inbox", [
        ("mail_inbox", "Write a new email.", 4, "<SOI>4<EOI>"),
    ]),
    ("mail-send", "net.mail.inbox", [
        ("mail_compose", "Fill in the recipient.", 0, "I am not sure which element to use."),
        ("mail_compose", "Send the email.", 3, "<SOI>3<EOI>"),
    ]),
]


def screen_doc(package, rows):
    children = []
    for i, (tag, name, text, desc) in enumerate(rows):
        node = {"class": CLASSES[tag], "bounds": [0, 100 * i, 1080, 100 * i + 90], "visible-to-user": True,
                "resource-id": f"{package}:id/{name}"}
        if text is not None:
            node["text"] = text
        if desc is not None:
            node["content-desc"] = [desc]
        children.append(node)
    root = {"class": "android.widget.FrameLayout", "bounds": [0, 0, 1080, 1920], "visible-to-user": True,
            "children": [{"class": "android.widget.LinearLayout", "bounds": [0, 0, 1080, 1920],
                          "visible-to-user": True, "children": children}]}
    return {"activity_name": f"{package}/.Main", "activity": {"root": root}}


def prompt_text(cli, task, screen, seed, flag, value):
    out = subprocess.run([cli, "prompt", "--corpus", str(ROOT), "--task", task, "--shots", str(SHOTS),
                          "--seed", str(seed), "--screen", screen, flag, value],
                         check=True, capture_output=True, text=True).stdout
    assert out.endswith("\n")
    return out[:-1]


def main():
    cli = sys.argv[1]
    (ROOT / "screens").mkdir(parents=True, exist_ok=True)
    for sid, (package, rows) in SCREENS.items():
        (ROOT / "screens" / f"{sid}.json").write_text(json.dumps(screen_doc(package, rows), ensure_ascii=False,
                                                                 indent=1) + "\n")
    (ROOT / "qa.jsonl").write_text("".join(
        json.dumps({"screen_id": s, "question": q, "answer": a}, ensure_ascii=False) + "\n" for s, q, a, _ in QA))
    (ROOT / "tasks.jsonl").write_text("".join(
        json.dumps({"task_id": t, "app_package": p,
                    "steps": [{"screen_id": s, "instruction": i, "gold": g} for s, i, g, _ in steps]}) + "\n"
        for t, p, steps in TASKS))

    recordings = []

    def record(prompt, completion):
        recordings.append({"hash": hashlib.sha256(prompt.encode()).hexdigest(), "prompt": prompt,
                           "completion": completion, "backend_id": "fixture", "ts": "2023-04-23T00:00:00Z"})

    for i, (screen, question, _, completion) in enumerate(QA):
        record(prompt_text(cli, "qa", screen, SEED + i, "--question", question), completion)
    position = 0
    for _, _, steps in TASKS:
        for screen, instruction, _, completion in steps:
            record(prompt_text(cli, "act", screen, SEED + position, "--instruction", instruction), completion)
            position += 1
    (ROOT / "recordings.jsonl").write_text("".join(json.dumps(r, ensure_ascii=False) + "\n" for r in recordings))


if __name__ == "__main__":
    main()
