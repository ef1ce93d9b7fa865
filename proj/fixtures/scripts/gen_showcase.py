#!/usr/bin/env python3
"""Builds the showcase fixture corpus and its golden files.

Outputs (relative to the fixtures/ directory):
  showcase/screens/*.json      RICO-style view hierarchies
  showcase/*.jsonl             task records
  golden/<screen_id>.html      expected HTML per screen
  golden/prompts/*.txt         expected prompt text per task

The golden text is transcribed from the raw listings below by normalizing
inner-text padding to one space per side and escaping '&'. It never runs the
C++ renderer. The view hierarchies are authored so that rendering them should
reproduce those listings; the C++ tests check that it does.
"""

import json
import pathlib
import re

HERE = pathlib.Path(__file__).resolve().parent
FIXTURES = HERE.parent

QG_PASSWORD = r"""
<p id=0 class="alertTitle">  Create password  </p>
<div id=1 class="titleDivider">   </div>
<input id=2 class="password">  Crowd3116  </input>
<input id=3 class="confirm password">  Crowd3116  </input>
<input id=4 class="hint">  c3  </input>
<input id=5 class="edEmailAddress">  appcrawler4@gmail.com  </input>
<p id=6 class="tvEmailAddressInfo">  This email address will be used to reset your password.  </p>
<button id=7 class="button2">  Cancel  </button>
<button id=8 class="button1">  OK  </button>
"""

QG_REFUND = r"""
<p id=0> IRS2Go,  </p>
<button id=1 alt="Open navigation drawer">  </button>
<p id=2 class="titleRefund"> Refund Status </p>
<p id=3 class="refundHeaderText"> Check your refund status by entering your information as shown on your 2015 tax return. This tool is updated no more than once every 24 hours, usually overnight.  </p>
<input id=4 class="taxId3Edit" alt="First 3 Digits of Social Security Number">  </input>
<p id=5 class="dash1"> - </p>
<input id=6 class="taxId2Edit" alt="Middle 2 Digits of Social Security Number">  </input>
<p id=7 class="dash2"> - </p>
<input id=8 class="taxId4Edit" alt="Last 4 Digits of Social Security Number">  </input>
<p id=9> Filing Status </p>
<input id=10 class="refundAmountEdit">  </input>
<button id=11 class="privacyNoticeButton" alt="Privacy Notice"> Privacy Notice,  </button>
<button id=12 class="getStatusButton" alt="Get Status"> GET STATUS,  </button>
<div id=13 class="navigationBarBackground">  </div>
<div id=14 class="statusBarBackground">  </div>
"""

SUM_CONTACTS = r"""
<img id=0>  </img>
<p id=1 class="cliv name textview"> Create new contact  </p>
<img id=2>  </img>
<p id=3 class="cliv name textview"> Add to a contact  </p>
<img id=4>  </img>
<p id=5 class="cliv name textview"> Send SMS  </p>
<button id=6 class="floating action button" alt="dial pad">  </button>
<button id=7 class="search back button" alt="stop searching">  </button>
<input id=8 class="search view"> 18773312998  </input>
<img id=9 class="search close button" alt="Clear search">  </img>
<div id=10 class="navigationBarBackground">  </div>
<div id=11 class="statusBarBackground">  </div>
"""

QA_INVITE = r"""
<p id=0> Invite for T20 Fans Live Chat  </p>
<button id=1 alt="Choose account">  </button>
<p id=2 class="menu send" alt="Send">  </p>
<p id=3 class="message header"> Message  </p>
<input id=4 class="message"> Join me on T20 Fans Live chat.  </input>
<div id=5 class="message separator">  </div>
<p id=6 class="message limit">  </p>
<div id=7 class="separator">  </div>
<p id=8 class="selection"> Add recipients  </p>
<div id=9 class="separator">  </div>
<p id=10 class="text"> Suggestions from Google  </p>
<p id=11> A,  </p>
<p id=12 class="name"> appcrawler5@gmail.com  </p>
<p id=13 class="contact detail"> appcrawler5@gmail.com  </p>
<img id=14 class="contact method">  </img>
<div id=15 class="divider">  </div>
<p id=16> A,  </p>
<p id=17 class="name"> appcrawler4@gmail.com  </p>
<p id=18 class="contact detail"> appcrawler4@gmail.com  </p>
<img id=19 class="contact method">  </img>
<div id=20 class="divider">  </div>
<p id=21 class="text"> Everyone  </p>
<img id=22>  </img>
<p id=23 class="name"> App Crawler  </p>
<p id=24 class="contact detail"> (415) 336-5454  </p>
<img id=25 class="contact method">  </img>
<img id=26 class="channel switcher icon">  </img>
<div id=27 class="divider">  </div>
<p id=28> T,  </p>
<p id=29 class="name"> test,  </p>
<p id=30 class="contact detail"> (415) 336-5454  </p>
<img id=31 class="contact method">  </img>
<img id=32 class="channel switcher icon">  </img>
<div id=33 class="divider">  </div>
<div id=34 class="navigationBarBackground">  </div>
<div id=35 class="statusBarBackground">  </div>
"""

ACT_LAUNCHER = r"""
<div id=0 alt="Apps list">  </div>
<img id=1 class="g icon">  </img>
<img id=2 class="mic icon" alt="Voice search">  </img>
<p id=3 class="icon" alt="Calculator"> Calculator  </p>
<p id=4 class="icon" alt="Calendar"> Calendar  </p>
<p id=5 class="icon" alt="Camera"> Camera  </p>
<p id=6 class="icon" alt="Chrome"> Chrome  </p>
<p id=7 class="icon" alt="Clock"> Clock  </p>
<p id=8 class="icon" alt="Contacts"> Contacts  </p>
<p id=9 class="icon" alt="Custom Locale"> Custom Locale  </p>
<p id=10 class="icon" alt="Dev Tools"> Dev Tools  </p>
<p id=11 class="icon" alt="Drive"> Drive  </p>
<p id=12 class="icon" alt="Files"> Files  </p>
<p id=13 class="icon" alt="Gmail"> Gmail  </p>
<p id=14 class="icon" alt="Google"> Google  </p>
<p id=15 class="icon" alt="Hangouts"> Hangouts  </p>
<p id=16 class="icon" alt="Maps"> Maps  </p>
<p id=17 class="icon" alt="Messages"> Messages  </p>
<p id=18 class="icon" alt="Phone"> Phone  </p>
<p id=19 class="icon" alt="Photos"> Photos  </p>
<p id=20 class="icon" alt="Play Movies & TV"> Play Movies & TV  </p>
<p id=21 class="icon" alt="Play Music"> Play Music  </p>
<p id=22 class="icon" alt="Settings"> Settings  </p>
<p id=23 class="icon" alt="WebView Browser Tester"> WebView Browser Tester  </p>
<p id=24 class="icon" alt="YouTube"> YouTube  </p>
<p id=25 class="icon" alt="Photos"> Photos  </p>
<p id=26 class="icon" alt="Maps"> Maps  </p>
<p id=27 class="icon" alt="Contacts"> Contacts  </p>
<p id=28 class="icon" alt="Settings"> Settings  </p>
<p id=29 class="icon" alt="Clock"> Clock  </p>
<div id=30 class="fast scroller">  </div>
<div id=31>  </div>
<div id=32 class="hotseat">  </div>
"""

QG_PASSWORD_COT = r"""
Now reasoning starts:
Q: How many input tags are there on the screen?
A: 4
Q: What is the purpose of the screen?
A: Create password.

It's a create password page and there are 4 input tags, including: 
1. id=2 asks for password.
2. id=3 asks to confirm password.
3. id=4 asks for hint.
4. id=5 asks for email address.

To help the user proceed with the screen, an agent will ask:
<SOQ>What password do you want to create? (id=2)<EOQ> 
<SOQ>Could you enter the password again to confirm? (id=3)<EOQ> 
<SOQ>What hint do you want to set? (id=4)<EOQ> 
<SOQ>What is your email in case you need to reset the password? (id=5)<EOQ>
"""

QG_REFUND_COT = r"""
Now reasoning starts:
Q: How many input tags are there on the screen?
A: 4
Q: What is the purpose of the screen?
A: Check your refund status. 

It's a check refund status page and there are 4 input tags, including: 
1. id=4 asks for first 3 digits of SSN
2. id=6 asks for middle 2 digits of SSN
3. id=8 asks for last 4 digits of SSN
4. id=10 asks for the amount of refund.

To help the user proceed with the screen, an agent will ask:
<SOQ>What is your SSN? (id=4, id=6, id=8)<EOQ> 
<SOQ>What is the refund amount? (id=10)<EOQ> 
"""

TEST_SIGNIN = """\
<p id=0 class="toolbar title"> Sign in </p>
<img id=1 class="app logo">  </img>
<input id=2 class="username" alt="Email address">  </input>
<input id=3 class="password">  </input>
<button id=4 class="login button"> Sign in </button>
<p id=5 class="forgot password"> Forgot password? </p>
<div id=6 class="statusBarBackground">  </div>
"""

TEST_QUESTION = "Where can I reset my password?"
TEST_INSTRUCTION = "Tap the sign in button."

PREAMBLE = {
    "generate-questions": "Given a screen, the agent needs to identify the elements requiring user input "
    "and generates corresponding questions.",
    "summarize": "Given a screen, summarize its purpose.",
    "qa": "Given a mobile screen and a question, provide the answer based on the screen information.",
    "act": "Given a screen, an instruction, predict the id of the UI element to perform the instruction.",
}

LINE = re.compile(r'^<(\w+) id=(\d+)((?: \w+="[^"]*")*)>(.*)</\1>$')
ATTR = re.compile(r' (\w+)="([^"]*)"')


def parse_listing(block):
    rows = []
    for raw in block.strip("\n").splitlines():
        m = LINE.match(raw.strip())
        assert m, raw
        attrs = dict(ATTR.findall(m.group(3)))
        rows.append({
            "tag": m.group(1),
            "id": int(m.group(2)),
            "class": attrs.get("class"),
            "alt": attrs.get("alt"),
            "text": m.group(4).strip(),
        })
    assert [r["id"] for r in rows] == list(range(len(rows)))
    return rows


def esc(s):
    return s.replace("&", "&amp;").replace('"', "&quot;").replace("<", "&lt;").replace(">", "&gt;")


def normalized_html(block):
    lines = []
    for r in parse_listing(block):
        head = f'<{r["tag"]} id={r["id"]}'
        if r["class"] is not None:
            head += f' class="{esc(r["class"])}"'
        if r["alt"] is not None:
            head += f' alt="{esc(r["alt"])}"'
        lines.append(f'{head}> {esc(r["text"])} </{r["tag"]}>')
    return "\n".join(lines)


def normalized_cot(block):
    return "\n".join(line.rstrip() for line in block.strip("\n").splitlines())


# --- view hierarchy authoring ------------------------------------------------

WIDTH, HEIGHT = 1440, 2560
ROW = 60


def leaf_class(row, launcher):
    tag = row["tag"]
    if tag == "p":
        if launcher and row["class"] == "icon":
            return "com.android.launcher3.BubbleTextView", ["android.widget.TextView", "android.view.View"]
        return "android.widget.TextView", ["android.view.View"]
    if tag == "button":
        if row["text"]:
            return "android.widget.Button", ["android.widget.TextView", "android.view.View"]
        return "android.widget.ImageButton", ["android.widget.ImageView", "android.view.View"]
    if tag == "img":
        return "android.widget.ImageView", ["android.view.View"]
    if tag == "input":
        return "android.widget.EditText", ["android.widget.TextView", "android.view.View"]
    return "android.view.View", ["java.lang.Object"]


def leaf_node(row, package, y, launcher):
    cls, anc = leaf_class(row, launcher)
    node = {
        "class": cls,
        "ancestors": anc,
        "bounds": [0, y, WIDTH, y + ROW],
        "visible-to-user": True,
        "clickable": row["tag"] in ("button", "input"),
    }
    if row["text"]:
        node["text"] = row["text"]
    if row["class"] is not None:
        node["resource-id"] = f"{package}:id/" + row["class"].replace(" ", "_")
    node["content-desc"] = [row["alt"]] if row["alt"] is not None else [None]
    return node


def build_hierarchy(block, package, activity, launcher=False):
    rows = parse_listing(block)
    groups = [rows[i:i + 4] for i in range(0, len(rows), 4)]
    containers = []
    y = 0
    for gi, group in enumerate(groups):
        top = y
        children = []
        for row in group:
            children.append(leaf_node(row, package, y, launcher))
            y += ROW
        # Noise that must never render: a hidden leaf and a zero-area leaf.
        children.insert(1, {"class": "android.widget.TextView", "text": "hidden", "bounds": [0, top, 10, top + 10],
                            "visible-to-user": False})
        children.append({"class": "android.widget.ImageView", "bounds": [5, y, 5, y], "visible-to-user": True})
        containers.append({
            "class": "android.widget.LinearLayout",
            "ancestors": ["android.view.ViewGroup", "android.view.View"],
            "bounds": [0, top, WIDTH, y],
            "visible-to-user": True,
            "children": children,
        })
    # Off-screen leaf below the display.
    containers.append({"class": "android.widget.TextView", "text": "offscreen",
                       "bounds": [0, HEIGHT + 10, WIDTH, HEIGHT + 90], "visible-to-user": True})
    root = {
        "class": "com.android.internal.policy.PhoneWindow$DecorView",
        "ancestors": ["android.widget.FrameLayout", "android.view.ViewGroup", "android.view.View"],
        "bounds": [0, 0, WIDTH, HEIGHT],
        "visible-to-user": True,
        "children": containers,
    }
    return {"activity_name": f"{package}/{activity}", "activity": {"root": root}, "is_keyboard_deployed": False}


SCREENS = {
    "qg_password": (QG_PASSWORD, "com.crowdcrypt.vault", ".CreatePasswordActivity", False),
    "qg_refund": (QG_REFUND, "gov.irs", ".RefundStatusActivity", False),
    "sum_contacts": (SUM_CONTACTS, "com.android.contacts", ".PeopleActivity", False),
    "qa_invite": (QA_INVITE, "com.t20fans.chat", ".InviteActivity", False),
    "act_launcher": (ACT_LAUNCHER, "com.google.android.apps.nexuslauncher", ".NexusLauncherActivity", True),
    "test_signin": (TEST_SIGNIN, "com.example.signin", ".LoginActivity", False),
}


def cot_record(screen_id, block, cot_text, page):
    lines = normalized_cot(cot_text).splitlines()
    summary = lines[lines.index("Q: What is the purpose of the screen?") + 1][len("A: "):]
    start = next(i for i, l in enumerate(lines) if l.endswith("including:")) + 1
    enumeration = []
    for line in lines[start:]:
        if not line:
            break
        m = re.match(r"^\d+\. id=(\d+) (.*)$", line)
        enumeration.append({"id": int(m.group(1)), "purpose": m.group(2)})
    questions = []
    for line in lines:
        m = re.match(r"^<SOQ>(.*) \(([^)]*)\)<EOQ>$", line)
        if m:
            ids = [int(x.strip()[3:]) for x in m.group(2).split(",")]
            questions.append({"text": m.group(1), "ids": ids})
    return {"screen_id": screen_id, "summary": summary, "page": page, "enumeration": enumeration,
            "questions": questions}


def test_block_header():
    return "Screen:\n" + normalized_html(TEST_SIGNIN) + "\n\n"


def main():
    corpus = FIXTURES / "showcase"
    (corpus / "screens").mkdir(parents=True, exist_ok=True)
    (FIXTURES / "golden" / "prompts").mkdir(parents=True, exist_ok=True)

    for sid, (block, package, activity, launcher) in SCREENS.items():
        doc = build_hierarchy(block, package, activity, launcher)
        (corpus / "screens" / f"{sid}.json").write_text(json.dumps(doc, indent=1) + "\n")
        (FIXTURES / "golden" / f"{sid}.html").write_text(normalized_html(block) + "\n")

    def jsonl(name, records):
        (corpus / name).write_text("".join(json.dumps(r) + "\n" for r in records))

    jsonl("questions.jsonl", [
        cot_record("qg_password", QG_PASSWORD, QG_PASSWORD_COT, "create password"),
        cot_record("qg_refund", QG_REFUND, QG_REFUND_COT, "check refund status"),
    ])
    jsonl("summaries.jsonl", [{"screen_id": "sum_contacts", "summaries": ["Screen of contact settings options"]}])
    jsonl("qa.jsonl", [{"screen_id": "qa_invite", "question": "What email addresses are there?",
                        "answer": "appcrawler5@gmail.com"}])
    jsonl("tasks.jsonl", [{"task_id": "launcher-clock", "app_package": "com.google.android.apps.nexuslauncher",
                           "steps": [{"screen_id": "act_launcher", "instruction": "Open your device's Clock app.",
                                      "gold": 29}]}])

    n_inputs = sum(1 for r in parse_listing(TEST_SIGNIN) if r["tag"] == "input")
    goldens = {
        "generate-questions_2shot": (
            PREAMBLE["generate-questions"] + "\n\n"
            + "Screen:\n" + normalized_html(QG_PASSWORD) + "\n\n" + normalized_cot(QG_PASSWORD_COT) + "\n\n"
            + "Screen:\n" + normalized_html(QG_REFUND) + "\n\n" + normalized_cot(QG_REFUND_COT) + "\n\n"
            + test_block_header()
            + "Now reasoning starts:\nQ: How many input tags are there on the screen?\n"
            + f"A: {n_inputs}\nQ: What is the purpose of the screen?\nA:"),
        "summarize_1shot": (
            PREAMBLE["summarize"] + "\n\n"
            + "Screen:\n" + normalized_html(SUM_CONTACTS) + "\n\n"
            + "Summary: <SOS>Screen of contact settings options<EOS>\n\n"
            + test_block_header() + "Summary:"),
        "qa_1shot": (
            PREAMBLE["qa"] + "\n\n"
            + "Screen:\n" + normalized_html(QA_INVITE) + "\n\n"
            + "Q: What email addresses are there?\nA: <SOA>appcrawler5@gmail.com<EOA>\n\n"
            + test_block_header() + f"Q: {TEST_QUESTION}\nA:"),
        "act_1shot": (
            PREAMBLE["act"] + "\n\n"
            + "Screen:\n" + normalized_html(ACT_LAUNCHER) + "\n\n"
            + "Instruction: Open your device's Clock app.\nPrediction: id=<SOI>29<EOI>\n\n"
            + test_block_header() + f"Instruction: {TEST_INSTRUCTION}\nPrediction: id="),
    }
    for name, text in goldens.items():
        (FIXTURES / "golden" / "prompts" / f"{name}.txt").write_text(text + "\n")


if __name__ == "__main__":
    main()
