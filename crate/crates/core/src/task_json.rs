use serde::{Deserialize, Serialize};

use crate::strips::{ActionSpec, FactId, StripsError, StripsTask};

/// JSON form of a grounded task: facts by name, everything else by index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskDump {
    pub facts: Vec<String>,
    pub actions: Vec<ActionDump>,
    pub init: Vec<u32>,
    pub goal: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionDump {
    pub name: String,
    pub pre: Vec<u32>,
    pub add: Vec<u32>,
    pub del: Vec<u32>,
}

fn raw(v: &[FactId]) -> Vec<u32> {
    v.iter().map(|f| f.0).collect()
}

fn ids(v: &[u32]) -> Vec<FactId> {
    v.iter().map(|&i| FactId(i)).collect()
}

impl From<&StripsTask> for TaskDump {
    fn from(t: &StripsTask) -> Self {
        TaskDump {
            facts: t.fact_names().to_vec(),
            actions: t
                .actions()
                .iter()
                .map(|a| ActionDump {
                    name: a.name.clone(),
                    pre: raw(&a.pre),
                    add: raw(&a.add),
                    del: raw(&a.del),
                })
                .collect(),
            init: t.init().iter().map(|f| f.0).collect(),
            goal: raw(t.goal()),
        }
    }
}

impl TryFrom<TaskDump> for StripsTask {
    type Error = StripsError;

    fn try_from(d: TaskDump) -> Result<Self, Self::Error> {
        let actions = d
            .actions
            .into_iter()
            .map(|a| ActionSpec {
                name: a.name,
                pre: ids(&a.pre),
                add: ids(&a.add),
                del: ids(&a.del),
            })
            .collect();
        StripsTask::new(d.facts, actions, ids(&d.init), ids(&d.goal))
    }
}

impl StripsTask {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&TaskDump::from(self)).expect("task dump serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, TaskJsonError> {
        let dump: TaskDump = serde_json::from_str(text)?;
        Ok(StripsTask::try_from(dump)?)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum TaskJsonError {
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Task(#[from] StripsError),
}
