/*
 * Copyright (c) 2026 The Venus Toolkit Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef VENUS_PROMPTS_HPP_
#define VENUS_PROMPTS_HPP_

#include <string>
#include <string_view>

#include "venus/trajectory.hpp"

namespace venus::prompts {

// Kept byte-identical to assets/prompts/*.txt (checked by the unit tests).
inline constexpr std::string_view kGrounding = R"PROMPT(Outline the position corresponding to the instruction: {problem}. The output should be only [x1,y1,x2,y2].
)PROMPT";

inline constexpr std::string_view kNavigation = R"PROMPT(**You are a GUI Agent**.

Your task is to analyze a given user task, review current screenshot and previous actions, and determine the next action to complete the task.

### User Task
{problem}

### Previous Actions
{history}

### Available Actions
You may execute one of the following functions:
Click(box=(x1, y1))
Drag(start=(x1, y1), end=(x2, y2))
Scroll(start=(x1, y1), end=(x2, y2), direction='down/up/right/left')
Type(content='')
Launch(app='')
Wait()
Finished(content='')
CallUser(content='')
LongPress(box=(x1, y1))
PressBack()
PressHome()
PressEnter()
PressRecent()

### Instruction
- Make sure you understand the task goal to avoid wrong actions.
- Make sure you carefully examine the current screenshot. Sometimes the summarized history might not be reliable, over-claiming some effects.
- For requests that are questions (or chat messages), remember to use the 'CallUser' action to reply to user explicitly before finishing! Then, after you have replied, use the Finished action if the goal is achieved.
- Consider exploring the screen by using the 'scroll' action with different directions to reveal additional content.
- To copy some text: first select the exact text you want to copy, which usually also brings up the text selection bar, then click the 'copy' button in bar.
- To paste text into a text box, first long press the text box, then usually the text selection bar will appear with a 'paste' button in it.
- You first think about the reasoning process in the mind, then provide the action. The reasoning and action are enclosed in <think></think> and <action></action> tags respectively. After providing action, summarize your action in <conclusion></conclusion> tags.
)PROMPT";

// Single pass over the template: every {problem} and {history} is replaced,
// and substituted text is never rescanned.
inline std::string fill(std::string_view tmpl, std::string_view problem, std::string_view history) {
  std::string out;
  out.reserve(tmpl.size() + problem.size() + history.size());
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl.compare(i, 9, "{problem}") == 0) {
      out.append(problem);
      i += 9;
    } else if (tmpl.compare(i, 9, "{history}") == 0) {
      out.append(history);
      i += 9;
    } else {
      out.push_back(tmpl[i++]);
    }
  }
  return out;
}

inline std::string render_grounding(std::string_view instruction) {
  return fill(kGrounding, instruction, {});
}

inline std::string render_navigation(std::string_view task, std::string_view history) {
  return fill(kNavigation, task, history);
}

// Prompt for step n (1-based) of a trajectory.
inline std::string render_navigation(const Trajectory& traj, int n) {
  return render_navigation(traj.task, render_history(history_context(traj, n)));
}

}  // namespace venus::prompts

#endif  // VENUS_PROMPTS_HPP_
