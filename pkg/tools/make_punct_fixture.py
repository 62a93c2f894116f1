#!/usr/bin/env python3
"""Generate the bundled punctuation-training fixture.

Writes ~50k words of synthetic call-center dialog to
src/callsum/resources/punct_fixture.txt, one sentence per line.  The text is
template-generated with a fixed seed so the file is reproducible; regenerate
only when templates change, and commit the result.

Constraints the tagger pipeline relies on:
  - only [a-z ] words plus the marks , . ?  (no apostrophes, digits, or "!")
  - no immediate unigram or bigram repetitions inside a sentence, so the
    stutter-collapse cleanup is a no-op on every line
"""

import random
import re
from pathlib import Path

TARGET_WORDS = 50_000
SEED = 20240817

SERVICES = [
    "internet service", "cable service", "phone service", "wireless plan",
    "streaming service", "billing account", "data plan", "home network",
    "security package", "landline service",
]
PROBLEMS = [
    "running slow", "cutting out", "not working", "completely down",
    "acting up", "dropping the connection", "very unstable",
    "showing an error", "making a buzzing noise", "freezing constantly",
]
DEVICES = [
    "router", "modem", "receiver", "remote", "tablet", "gateway",
    "cable box", "base station", "signal booster", "adapter",
]
NAMES = [
    "sarah", "michael", "jessica", "david", "emily", "brandon", "melissa",
    "kevin", "amanda", "tyler", "nicole", "jason", "rachel", "eric",
]
TIMES = [
    "monday morning", "tuesday afternoon", "last night", "yesterday evening",
    "this morning", "last week", "two days ago", "over the weekend",
    "earlier today", "wednesday evening", "around noon", "friday morning",
]
AMOUNTS = [
    "twenty", "thirty five", "forty", "fifty two", "sixty", "seventy five",
    "ninety", "one hundred twenty", "fifteen", "eighty five",
]
ORDINALS = [
    "first", "fifth", "tenth", "fifteenth", "twentieth", "twenty fifth",
    "twenty eighth", "third",
]
CITIES = [
    "springfield", "riverside", "fairview", "greenville", "franklin",
    "clinton", "salem", "madison", "georgetown", "arlington",
]
STREETS = [
    "maple", "oak", "cedar", "elm", "willow", "birch", "chestnut", "walnut",
]
DEPTS = ["billing", "technical support", "retention", "sales", "scheduling"]

AGENT_TEMPLATES = [
    "thank you for calling customer support, my name is {name}, how can i help you today?",
    "i am sorry to hear that, let me take a look at your account.",
    "could i get your name and the phone number on the account please?",
    "have you tried restarting the {device} since then?",
    "okay, i am going to run a quick diagnostic on the line.",
    "it looks like there was an outage in your area {time}.",
    "i can schedule a technician visit for {time}, does that work for you?",
    "your current balance is {amount} dollars, and the payment is due on the {ordinal}.",
    "i have applied a credit of {amount} dollars to your account.",
    "is there anything else i can help you with today?",
    "thank you for your patience, i know this has taken a while.",
    "let me transfer you to our {dept} department, please hold for a moment.",
    "can you read me the serial number on the bottom of the {device}?",
    "the lights on the {device} should turn green in a few minutes.",
    "i will send a refresh signal to your {device} right now.",
    "do you see any error message on the screen?",
    "according to our records the service at your address is active.",
    "i apologize for the inconvenience, we will get this sorted out.",
    "you should receive a confirmation email within the hour.",
    "while that restarts, can i verify the last four digits of your account number?",
    "the {dept} team will reach out to you by {time}.",
    "i am showing that your {service} was upgraded on the {ordinal}.",
    "would you like me to waive the {amount} dollar fee this one time?",
    "please stay on the line while i check with my supervisor.",
    "unfortunately the earliest opening we have is {time}.",
    "once the {device} reboots, the connection should come back on its own.",
    "may i place you on a brief hold while i review the notes?",
    "i have updated the address on file to {city}.",
    "your appointment is confirmed for {time}, and you will get a reminder call.",
    "does the {device} show a solid light or a blinking light right now?",
]

CUSTOMER_TEMPLATES = [
    "hi, i am calling about my {service}.",
    "my {service} has been {problem} since {time}.",
    "i already restarted the {device} twice and nothing changed.",
    "can you tell me why my bill went up this month?",
    "i was charged {amount} dollars and i do not know what the charge is for.",
    "the {device} keeps blinking red no matter what i try.",
    "when will the technician arrive?",
    "that time works fine for me.",
    "i have been a customer for over ten years.",
    "this is the third time i have called about the same problem.",
    "do i need to be home for the appointment?",
    "how long will the outage last?",
    "okay, i will try that right now.",
    "yes, the account is under my name.",
    "sure, the number is on the back of the {device}.",
    "alright, it is restarting now.",
    "no, that is everything, thank you for your help.",
    "my address is {ordinal} {street} street in {city}.",
    "i would like to cancel the {service} on my account.",
    "could you send me a replacement {device} instead?",
    "the service went out again {time} and stayed out for hours.",
    "i pay {amount} dollars every month and i expect the service to work.",
    "hold on, let me grab the {device}.",
    "the light is green now, and the pages are loading again.",
    "what happens if the technician does not show up?",
    "my neighbor in {city} has the same {service} and no problems at all.",
    "i spoke to someone {time} and they promised a call back.",
    "is there a cheaper plan than the one i have now?",
    "well, i suppose that will have to do.",
    "can you note the account so i do not have to explain this again?",
]

SHORT_UTTERANCES = [
    "okay.",
    "alright.",
    "i see.",
    "got it.",
    "no problem.",
    "perfect.",
    "sounds good.",
    "one moment please.",
    "thank you.",
    "of course.",
    "are you still there?",
    "does that make sense?",
    "anything else?",
    "that is correct.",
    "not really.",
    "exactly.",
    "right, go ahead.",
    "sure thing.",
]

SLOT_POOLS = {
    "service": SERVICES,
    "problem": PROBLEMS,
    "device": DEVICES,
    "name": NAMES,
    "time": TIMES,
    "amount": AMOUNTS,
    "ordinal": ORDINALS,
    "city": CITIES,
    "street": STREETS,
    "dept": DEPTS,
}

SLOT_RE = re.compile(r"\{(\w+)\}")
WORD_RE = re.compile(r"[a-z]+")


def fill(template: str, rng: random.Random) -> str:
    return SLOT_RE.sub(lambda m: rng.choice(SLOT_POOLS[m.group(1)]), template)


def has_stutter(sentence: str) -> bool:
    toks = WORD_RE.findall(sentence)
    for i in range(len(toks) - 1):
        if toks[i] == toks[i + 1]:
            return True
    for i in range(len(toks) - 3):
        if toks[i : i + 2] == toks[i + 2 : i + 4]:
            return True
    return False


def main() -> None:
    rng = random.Random(SEED)
    out = Path(__file__).resolve().parent.parent / "src" / "callsum" / "resources" / "punct_fixture.txt"
    lines: list[str] = []
    words = 0
    agent_turn = True
    while words < TARGET_WORDS:
        roll = rng.random()
        if roll < 0.15:
            sentence = rng.choice(SHORT_UTTERANCES)
        elif agent_turn:
            sentence = fill(rng.choice(AGENT_TEMPLATES), rng)
        else:
            sentence = fill(rng.choice(CUSTOMER_TEMPLATES), rng)
        if has_stutter(sentence):
            continue
        if lines:
            # avoid repeats across line boundaries too, so concatenating
            # consecutive sentences never triggers stutter collapse
            prev = WORD_RE.findall(lines[-1])
            cur = WORD_RE.findall(sentence)
            if prev and cur and prev[-1] == cur[0]:
                continue
            if len(prev) >= 2 and len(cur) >= 2 and prev[-2:] == cur[:2]:
                continue
        lines.append(sentence)
        words += len(WORD_RE.findall(sentence))
        agent_turn = not agent_turn
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {out} ({words} words, {len(lines)} sentences)")


if __name__ == "__main__":
    main()
