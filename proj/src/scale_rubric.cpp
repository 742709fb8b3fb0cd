#include "bemseval/scale.hpp"

namespace bemseval {

// Factor criteria are listed from 1.0 down to 0.0.
std::string default_rubric_json() {
  return R"json({
  "factors": [
    {
      "id": "explicitness",
      "name": "Explicitness",
      "description": "How directly and clearly the concept is mentioned using appropriate terminology",
      "user": [
        "Domain terminology used correctly in context",
        "General energy terms used appropriately in context",
        "Related terms that imply concept understanding",
        "Indirect references requiring some inference",
        "Vague connection or unclear terminology",
        "No mention or connection"
      ],
      "assistant": [
        "Precise domain terminology with technical accuracy (kWh, TOU rates, HVAC)",
        "Appropriate technical terms with clear explanations",
        "General energy terminology used correctly",
        "Basic energy terms with some accuracy",
        "Imprecise or unclear terminology",
        "No meaningful terminology used"
      ]
    },
    {
      "id": "depth",
      "name": "Depth",
      "description": "Quality and authenticity of engagement with the concept",
      "user": [
        "Deep contextual engagement with detailed reasoning, constraints, or comprehensive understanding",
        "Substantial contextual engagement with clear reasoning or thoughtful analysis",
        "Moderate contextual engagement with some reasoning or understanding",
        "Basic contextual engagement with minimal reasoning or surface-level understanding",
        "Shallow engagement with little reasoning or very limited understanding",
        "No meaningful engagement demonstrated"
      ],
      "assistant": [
        "Comprehensive multi-faceted analysis examining multiple dimensions of the concept",
        "Thorough analysis exploring several aspects or implications of the concept",
        "Moderate analysis covering key aspects with reasonable detail",
        "Basic analysis touching on main points with limited development",
        "Superficial analysis with minimal exploration or development",
        "No meaningful analytical processing demonstrated"
      ]
    },
    {
      "id": "consideration",
      "name": "Consideration",
      "description": "Whether the concept was meaningfully present in the conversation",
      "user": [
        "Concept clearly influences user's decisions, preferences, or thinking",
        "Concept is actively considered in relation to user's situation",
        "Concept is acknowledged and shows contextual relevance",
        "Concept is mentioned with minimal contextual connection",
        "Concept is barely acknowledged or referenced",
        "Concept is not considered in user's thinking"
      ],
      "assistant": [
        "Concept is fully integrated into analysis and recommendations",
        "Concept is clearly incorporated into response strategy",
        "Concept is meaningfully addressed in the analysis",
        "Concept is mentioned but not well integrated",
        "Concept is briefly touched upon",
        "Concept is not considered in the response"
      ]
    },
    {
      "id": "evidence",
      "name": "Evidence",
      "description": "Quality and authenticity of supporting evidence provided",
      "user": [
        "Contextual examples, specific constraints, or experimental details",
        "Clear situational context or constraints with details",
        "General contextual examples or reasonable situational context",
        "Some contextual information or basic examples",
        "Minimal supporting contextual information",
        "No contextual evidence or examples provided"
      ],
      "assistant": [
        "Multiple high-quality sources: quantitative data + domain expertise + specific examples",
        "Strong primary source with additional supporting information",
        "Solid single source with reasonable supporting details",
        "Basic source material with minimal additional support",
        "Weak or limited source material with little support",
        "No credible supporting information provided"
      ]
    }
  ],
  "concepts": [
    {
      "id": "information_seeking",
      "name": "Information seeking",
      "category": "conversational_reasoning",
      "sides": "user",
      "definition": "The participant asks for information, clarification, explanation, or more detail about the data, the analysis, or a recommendation.",
      "examples": ["What does this chart tell me?", "Could you break down what the pool pump costs me each month?", "How would I actually set that up?"]
    },
    {
      "id": "constraint_articulation",
      "name": "Constraint articulation",
      "category": "conversational_reasoning",
      "sides": "user",
      "definition": "The participant states personal limitations, preferences, boundaries, or situational constraints that rule options in or out.",
      "examples": ["I work from home in the afternoon so I need cooling then", "We can't run the dryer late because of the noise", "I don't want to change when we cook dinner"]
    },
    {
      "id": "solution_evaluation",
      "name": "Solution evaluation",
      "category": "conversational_reasoning",
      "sides": "user",
      "definition": "The participant judges, assesses, or critiques a proposed solution, for example by agreeing, objecting, or weighing its feasibility for their household.",
      "examples": ["Moving the EV charging sounds easy for us", "I doubt a shorter pool pump schedule keeps the water clean", "That setpoint change seems too aggressive"]
    },
    {
      "id": "commitment_expression",
      "name": "Commitment expression",
      "category": "conversational_reasoning",
      "sides": "user",
      "definition": "The participant expresses willingness or intent to adopt a recommended change or commits to a specific behavior.",
      "examples": ["I'll start charging the car after 9 pm", "I'm willing to use a fan instead of lowering the thermostat", "We will run the dishwasher before bed from now on"]
    },
    {
      "id": "appliance_energy_use",
      "name": "Appliance energy use",
      "category": "home_energy_analysis",
      "sides": "both",
      "definition": "Discussion of how much power or energy specific appliances or circuits draw, such as their consumption when running or their share of the load.",
      "examples": ["The EV charger pulls over 6 kW while charging", "Which appliance uses the most electricity?"]
    },
    {
      "id": "cost_awareness",
      "name": "Cost awareness",
      "category": "home_energy_analysis",
      "sides": "both",
      "definition": "Discussion of electricity bills, energy costs, utility or time-of-use rates, savings, or the financial impact of energy decisions.",
      "examples": ["Evening power costs more under this plan", "How much would this save on my bill?"]
    },
    {
      "id": "behavioral_change",
      "name": "Behavioral change",
      "category": "home_energy_analysis",
      "sides": "both",
      "definition": "Discussion of changing usage patterns or habits, or concrete actions that reduce or shift energy consumption.",
      "examples": ["Start the dishwasher after 9 pm", "I could run laundry on weekend mornings instead"]
    },
    {
      "id": "appliance_use_flexibility",
      "name": "Appliance use flexibility",
      "category": "home_energy_analysis",
      "sides": "both",
      "definition": "Discussion of whether an appliance runs on a fixed routine or could be rescheduled or shifted to other times.",
      "examples": ["The pool pump timer can be moved to the morning", "Our cooking times are pretty fixed"]
    },
    {
      "id": "appliance_use_frequency",
      "name": "Appliance use frequency",
      "category": "home_energy_analysis",
      "sides": "both",
      "definition": "Discussion of how often appliances are used, in particular during on-peak versus off-peak hours.",
      "examples": ["The HVAC runs almost every hour of the peak window", "How often is the dryer used during peak hours?"]
    },
    {
      "id": "comfort_association",
      "name": "Comfort association with appliance",
      "category": "home_energy_analysis",
      "sides": "both",
      "definition": "Discussion of how using or curtailing an appliance affects occupant comfort, health, or convenience.",
      "examples": ["Raising the setpoint may make the house too warm", "Charging the car later doesn't affect anyone's comfort"]
    },
    {
      "id": "technical_knowledge",
      "name": "Technical knowledge",
      "category": "home_energy_analysis",
      "sides": "both",
      "definition": "Discussion showing understanding of how appliances and systems operate, their specifications, or other technical aspects of energy use.",
      "examples": ["A variable-speed pool pump uses less power at low speed", "A heat pump water heater moves heat instead of generating it"]
    }
  ]
}
)json";
}

}  // namespace bemseval
