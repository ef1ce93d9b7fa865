#!/usr/bin/env python3
"""Builds a seeded 50-screen corpus (5 packages x 10 screens) with noisy
view hierarchies, plus the expected HTML for every screen.

The expected HTML comes from the small reference renderer in this file, which
is written against the documented rules and shares no code with the library.

Outputs (relative to fixtures/):
  corpus50/screens/*.json
  corpus50/{summaries,qa,tasks,questions}.jsonl
  golden/corpus50/<screen_id>.html
"""

import json
import pathlib
import random

FIXTURES = pathlib.Path(__file__).resolve().parent.parent
W, H = 1080, 1920

PACKAGES = ["com.bloom.weather", "org.notes.pad", "com.shop.cart", "net.mail.inbox", "io.fit.tracker"]

LEAF_CLASSES = [
    ("android.widget.TextView", ["android.view.View", "java.lang.Object"]),
    ("android.widget.Button", ["android.widget.TextView", "android.view.View"]),
    ("android.widget.ImageButton", ["android.widget.ImageView", "android.view.View"]),
    ("android.widget.ImageView", ["android.view.View"]),
    ("android.widget.EditText", ["android.widget.TextView", "android.view.View"]),
    ("android.support.v7.widget.AppCompatEditText", ["android.widget.EditText", "android.widget.TextView"]),
    ("android.widget.AutoCompleteTextView", ["android.widget.EditText", "android.widget.TextView"]),
    ("android.widget.CheckBox", ["android.widget.CompoundButton", "android.widget.Button", "android.widget.TextView"]),
    ("com.custom.FancyLabel", ["android.widget.TextView", "android.view.View"]),
    ("com.custom.AvatarView", ["android.widget.ImageView", "android.view.View"]),
    ("android.view.View", ["java.lang.Object"]),
    ("android.widget.LinearLayout", ["android.view.ViewGroup", "android.view.View"]),
]

CONTAINERS = [
    ("android.widget.LinearLayout", ["android.view.ViewGroup", "android.view.View"]),
    ("android.widget.FrameLayout", ["android.view.ViewGroup", "android.view.View"]),
    ("android.widget.RelativeLayout", ["android.view.ViewGroup", "android.view.View"]),
    ("android.support.v7.widget.RecyclerView", ["android.view.ViewGroup", "android.view.View"]),
    ("android.widget.ScrollView", ["android.widget.FrameLayout", "android.view.ViewGroup"]),
]

RESOURCE_NAMES = [
    "unread_count_textView", "date", "title", "toolbar_title", "search_src_text", "btn_ok", "a__b",
    "refundAmountEdit", "_leading", "trailing_", "email_input", "password_input", "menu__overflow",
    "icon", "avatar_image", "send_button", "",
]

TEXTS = [
    "Hello", "Sign in", "Tom & Jerry", 'Say "hi"', "a < b > c", "Line one\nLine two", "Crème brûlée",
    "日本語テキスト", "42", "version 2.7.3", "Tomorrow", "Settings", "  padded  ", "Play Movies & TV", "",
]

DESCS = ["Navigate up", "More options", "Open <menu>", "Photo & video", "Voice search", ""]


# --- reference renderer ------------------------------------------------------

def simple_name(cls):
    return cls.rsplit(".", 1)[-1]


def map_tag(cls, ancestors):
    for name in [simple_name(cls)] + [simple_name(a) for a in ancestors]:
        low = name.lower()
        for needle, tag in (("edittext", "input"), ("button", "button"), ("image", "img"), ("textview", "p")):
            if needle in low:
                return tag
    return "div"


def words_of(resource_id):
    if resource_id is None:
        return None
    name = resource_id
    if "/" in name:
        name = name[name.rindex("/") + 1:]
    elif ":" in name:
        name = name[name.rindex(":") + 1:]
    parts = [p for p in name.split("_") if p]
    return " ".join(parts) if parts else None


def escape(s):
    out = []
    for ch in s:
        out.append({"&": "&amp;", '"': "&quot;", "<": "&lt;", ">": "&gt;"}.get(ch, ch))
    return "".join(out)


def one_line(s):
    return s.replace("\r\n", " ").replace("\r", " ").replace("\n", " ")


def desc_of(node):
    d = node.get("content-desc")
    if isinstance(d, list):
        d = next((x for x in d if isinstance(x, str)), None)
    return d if d else None


def qualifies(node):
    if not node.get("visible-to-user", True):
        return False
    l, t, r, b = node["bounds"]
    if r < l or b < t:
        return False
    if r - l <= 0 or b - t <= 0:
        return False
    return l < W and r > 0 and t < H and b > 0


def reference_leaves(root):
    # Pre-order list of all nodes with their parent chain, then keep qualifying
    # nodes that have no qualifying node below them.
    order = []
    stack = [(root, ())]
    while stack:
        node, path = stack.pop()
        order.append((node, path))
        kids = [c for c in node.get("children", []) if isinstance(c, dict)]
        for c in reversed(kids):
            stack.append((c, path + (id(node),)))
    qualified = [n for n, _ in order if qualifies(n)]
    has_qualifying_below = set()
    for n, path in order:
        if qualifies(n):
            has_qualifying_below.update(path)
    return [n for n in qualified if id(n) not in has_qualifying_below]


def reference_html(root):
    lines = []
    for i, n in enumerate(reference_leaves(root)):
        tag = map_tag(n["class"], n.get("ancestors", []))
        head = f"<{tag} id={i}"
        words = words_of(n.get("resource-id"))
        if words is not None:
            head += f' class="{escape(one_line(words))}"'
        desc = desc_of(n)
        if desc is not None:
            head += f' alt="{escape(one_line(desc))}"'
        text = escape(one_line(n.get("text") or ""))
        lines.append(f"{head}> {text} </{tag}>")
    return lines


# --- generator ---------------------------------------------------------------

def make_leaf(rng, package, box):
    cls, anc = rng.choice(LEAF_CLASSES)
    node = {"class": cls, "ancestors": anc, "bounds": box, "visible-to-user": True}
    text = rng.choice(TEXTS)
    if text:
        node["text"] = text
    name = rng.choice(RESOURCE_NAMES + [None, None])
    if name is not None:
        node["resource-id"] = f"{package}:id/{name}"
    elif rng.random() < 0.1:
        node["resource-id"] = "android:title"
    r = rng.random()
    if r < 0.2:
        node["content-desc"] = rng.choice(DESCS)
    elif r < 0.4:
        node["content-desc"] = [rng.choice(DESCS + [None])]
    return node


def make_noise(rng, box):
    kind = rng.randrange(4)
    l, t, r, b = box
    if kind == 0:
        return {"class": "android.widget.TextView", "text": "invisible", "bounds": box, "visible-to-user": False}
    if kind == 1:
        return {"class": "android.widget.ImageView", "bounds": [r, t, l, b] if r > l else [l + 5, t, l, b],
                "visible-to-user": True}
    if kind == 2:
        return {"class": "android.widget.Button", "text": "offscreen", "bounds": [W + 10, t, W + 200, b]}
    return {"class": "android.view.View", "bounds": [l, t, l, b], "visible-to-user": True}


def make_tree(rng, package, box, depth):
    l, t, r, b = box
    if depth == 0 or rng.random() < 0.25:
        return make_leaf(rng, package, box)
    cls, anc = rng.choice(CONTAINERS)
    n = rng.randint(1, 4)
    height = max(1, (b - t) // n)
    children = []
    for k in range(n):
        sub = [l, t + k * height, r, t + (k + 1) * height]
        children.append(make_tree(rng, package, sub, depth - 1))
        if rng.random() < 0.3:
            children.append(make_noise(rng, sub))
    if rng.random() < 0.05:
        children.append(None)
    node = {"class": cls, "ancestors": anc, "bounds": box, "visible-to-user": True, "children": children}
    if rng.random() < 0.2:
        node["resource-id"] = f"{package}:id/container"
    if rng.random() < 0.08:
        # Container whose only child is hidden: the container itself becomes a leaf.
        node["children"] = [{"class": "android.widget.TextView", "text": "x", "bounds": box, "visible-to-user": False}]
    return node


def main():
    rng = random.Random(20230423)
    root_dir = FIXTURES / "corpus50"
    golden_dir = FIXTURES / "golden" / "corpus50"
    (root_dir / "screens").mkdir(parents=True, exist_ok=True)
    golden_dir.mkdir(parents=True, exist_ok=True)

    summaries, qa, tasks, questions = [], [], [], []
    for p, package in enumerate(PACKAGES):
        screen_ids = []
        for s in range(10):
            sid = f"{package.split('.')[1]}_{s:02d}"
            root = {
                "class": "com.android.internal.policy.PhoneWindow$DecorView",
                "ancestors": ["android.widget.FrameLayout", "android.view.ViewGroup", "android.view.View"],
                "bounds": [0, 0, W, H],
                "visible-to-user": True,
                "children": [make_tree(rng, package, [0, 0, W, H], 4)],
            }
            doc = {"activity_name": f"{package}/.Screen{s}", "activity": {"root": root}}
            lines = reference_html(root)
            if not lines:
                doc["activity"]["root"]["children"].append(make_leaf(rng, package, [0, 0, W, 100]))
                lines = reference_html(root)
            (root_dir / "screens" / f"{sid}.json").write_text(json.dumps(doc, ensure_ascii=False, indent=1) + "\n")
            (golden_dir / f"{sid}.html").write_text("\n".join(lines) + "\n")
            screen_ids.append(sid)

            summaries.append({"screen_id": sid, "summaries": [f"Screen {s} of the {package.split('.')[1]} app"]})
            texts = [n.get("text") for n in reference_leaves(root) if n.get("text", "").strip()]
            if texts:
                qa.append({"screen_id": sid, "question": "What text is shown first?", "answer": texts[0]})
            inputs = [i for i, line in enumerate(lines) if line.startswith("<input ")]
            if inputs:
                questions.append({
                    "screen_id": sid, "summary": f"Fill in screen {s}.", "page": "form",
                    "enumeration": [{"id": i, "purpose": f"asks for field {i}."} for i in inputs],
                    "questions": [{"text": f"What goes in field {i}?", "ids": [i]} for i in inputs],
                })
        for t in range(2):
            steps = []
            for sid in screen_ids[t * 3:t * 3 + 3]:
                count = len((golden_dir / f"{sid}.html").read_text().splitlines())
                steps.append({"screen_id": sid, "instruction": f"Tap item {count - 1} on {sid}.", "gold": count - 1})
            tasks.append({"task_id": f"{package}-task{t}", "app_package": package, "steps": steps})

    def jsonl(name, records):
        (root_dir / name).write_text("".join(json.dumps(r, ensure_ascii=False) + "\n" for r in records))

    jsonl("summaries.jsonl", summaries)
    jsonl("qa.jsonl", qa)
    jsonl("tasks.jsonl", tasks)
    jsonl("questions.jsonl", questions)


if __name__ == "__main__":
    main()
